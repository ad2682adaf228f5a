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


// Umbrella header: pulls in every module.

#ifndef RFEMBED_RFEMBED_HPP
#define RFEMBED_RFEMBED_HPP

#include "rfembed/cli.hpp"
#include "rfembed/config.hpp"
#include "rfembed/dataio.hpp"
#include "rfembed/embednet.hpp"
#include "rfembed/error.hpp"
#include "rfembed/evalverify.hpp"
#include "rfembed/featcsp.hpp"
#include "rfembed/featstat.hpp"
#include "rfembed/impair.hpp"
#include "rfembed/instance.hpp"
#include "rfembed/pipeline.hpp"
#include "rfembed/protogen.hpp"
#include "rfembed/signal.hpp"
#include "rfembed/waveform.hpp"

#endif
