// Copyright 2026 The Mage Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <span>
#include <vector>

#include "mage/enclave_image.hpp"
#include "mage/mage_derive.hpp"
#include "mage/mars_section.hpp"

// OpenMP kernels over independent group members. Each has a serial
// reference that tests compare against and the benchmark times.
namespace mage {

std::vector<Mainfo> derive_mainfos(std::span<const EnclaveImage> images);
std::vector<Mainfo> derive_mainfos_serial(std::span<const EnclaveImage> images);

std::vector<SplitMainfo> derive_split_mainfos(std::span<const EnclaveImage> images);
std::vector<SplitMainfo> derive_split_mainfos_serial(std::span<const EnclaveImage> images);

std::vector<Measurement> final_measurements(std::span<const EnclaveImage> images);
std::vector<Measurement> final_measurements_serial(std::span<const EnclaveImage> images);

// derive_measurement(view, j) for every j < mage_size(view).
std::vector<Measurement> derive_all(const MageView& view);
std::vector<Measurement> derive_all_serial(const MageView& view);

// Threads OpenMP will use; 1 when built without OpenMP.
int parallel_threads();

}  // namespace mage
