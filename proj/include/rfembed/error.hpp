// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 The rfembed Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef RFEMBED_ERROR_HPP
#define RFEMBED_ERROR_HPP

#include <stdexcept>
#include <string>

namespace rfembed {

// Base of every error raised by the library. Two families exist: validation
// errors (bad arguments, bad configuration, malformed data) and I/O errors
// (filesystem). The CLI maps them to exit codes 1 and 2.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class ConfigError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class UnsupportedModulation : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class SignalTooShort : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// Verification needs at least two classes.
class VerificationUndefined : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class IoError : public Error {
public:
    using Error::Error;
};

class CorruptFile : public IoError {
public:
    using IoError::IoError;
};

class TrainingDiverged : public Error {
public:
    using Error::Error;
};

inline void require(bool condition, const std::string& what) {
    if (!condition) {
        throw ValidationError(what);
    }
}

}  // namespace rfembed

#endif
