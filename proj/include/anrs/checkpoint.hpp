/*
 * Copyright 2026 The ANRS Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef ANRS_CHECKPOINT_HPP_
#define ANRS_CHECKPOINT_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "anrs/config.hpp"
#include "anrs/model.hpp"
#include "anrs/tensor.hpp"

namespace anrs {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  Config config;
  std::uint64_t vocab_hash = 0;
  ModelShape shape;
  ModelParams params;
};

// Binary layout: magic, version, vocabulary hash, model shape, config text,
// then every named parameter tensor (name, rank, dims, values).
void WriteCheckpoint(std::ostream& out, const Config& config,
                     std::uint64_t vocab_hash, const ModelShape& shape,
                     ModelParams& params);
void SaveCheckpoint(const std::filesystem::path& path, const Config& config,
                    std::uint64_t vocab_hash, const ModelShape& shape,
                    ModelParams& params);

// Throws CompatibilityError on a foreign magic, another version, or a tensor
// set that does not match the stored config; InputError when truncated.
Checkpoint ReadCheckpoint(std::istream& in);
Checkpoint LoadCheckpoint(const std::filesystem::path& path);

// Single tensor with its own magic, used for the cached embedding table.
void SaveTensor(const std::filesystem::path& path, const Tensor& tensor);
Tensor LoadTensor(const std::filesystem::path& path);

}  // namespace anrs

#endif  // ANRS_CHECKPOINT_HPP_
