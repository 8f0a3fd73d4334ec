// Copyright 2026 The vxpm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef VXPM_VXPM_HPP
#define VXPM_VXPM_HPP

#include "vxpm/channel.hpp"
#include "vxpm/metrics.hpp"
#include "vxpm/pmpdev.hpp"
#include "vxpm/quadrature.hpp"
#include "vxpm/scattering.hpp"
#include "vxpm/spectral.hpp"
#include "vxpm/types.hpp"

#endif  // VXPM_VXPM_HPP
