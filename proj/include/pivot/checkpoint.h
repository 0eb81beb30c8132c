// Copyright 2026 The pivot-adapt Authors
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


// Checkpoint files: the 8-byte magic "PIVOTCK1", a little-endian uint32
// header length, a UTF-8 JSON header, then the parameters as little-endian
// float32 in header order. The header carries the payload's SHA-256.

#ifndef PIVOT_CHECKPOINT_H_
#define PIVOT_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "pivot/autodiff.h"

namespace pivot {

inline constexpr char kCheckpointMagic[] = "PIVOTCK1";
inline constexpr int kCheckpointSchema = 1;

struct Tensor {
  std::string name;
  int rows = 0, cols = 0;
  std::vector<float> data;  // row-major
};

struct Checkpoint {
  std::string module;
  std::uint64_t seed = 0;
  nlohmann::json metadata = nlohmann::json::object();
  std::vector<Tensor> tensors;
};

Checkpoint MakeCheckpoint(const std::string& module, std::uint64_t seed,
                          const std::vector<const Parameter*>& params,
                          nlohmann::json metadata = nlohmann::json::object());

// Copies tensors into params, which must match in count, name and shape.
// Throws ParseError on any mismatch.
void RestoreParameters(const Checkpoint& ck, const std::vector<Parameter*>& params);

std::string SerializeCheckpoint(const Checkpoint& ck);
// Throws ParseError on a bad magic, header, length or hash.
Checkpoint ParseCheckpoint(const std::string& bytes);

void SaveCheckpoint(const Checkpoint& ck, const std::filesystem::path& path);
// Throws MissingArtifact when the file does not exist.
Checkpoint LoadCheckpoint(const std::filesystem::path& path);

std::string Sha256Hex(const std::string& bytes);
std::string FileSha256(const std::filesystem::path& path);

std::string ReadFileBytes(const std::filesystem::path& path);
void WriteFileBytes(const std::filesystem::path& path, const std::string& bytes);

}  // namespace pivot

#endif  // PIVOT_CHECKPOINT_H_
