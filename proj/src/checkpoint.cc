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


#include "pivot/checkpoint.h"

#include <openssl/sha.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "pivot/errors.h"

namespace pivot {
namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint payloads are written in host order");

constexpr std::size_t kMagicLen = 8;

void PutU32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t GetU32(const std::string& in, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[at + i])) << (8 * i);
  }
  return v;
}

std::string Payload(const Checkpoint& ck) {
  std::string out;
  for (const Tensor& t : ck.tensors) {
    const auto n = t.data.size() * sizeof(float);
    const std::size_t at = out.size();
    out.resize(at + n);
    std::memcpy(out.data() + at, t.data.data(), n);
  }
  return out;
}

}  // namespace

Checkpoint MakeCheckpoint(const std::string& module, std::uint64_t seed,
                          const std::vector<const Parameter*>& params,
                          nlohmann::json metadata) {
  Checkpoint ck;
  ck.module = module;
  ck.seed = seed;
  ck.metadata = std::move(metadata);
  for (const Parameter* p : params) {
    Tensor t{p->name, static_cast<int>(p->value.rows()), static_cast<int>(p->value.cols()), {}};
    t.data.reserve(static_cast<std::size_t>(p->value.size()));
    for (Eigen::Index r = 0; r < p->value.rows(); ++r) {
      for (Eigen::Index c = 0; c < p->value.cols(); ++c) {
        t.data.push_back(static_cast<float>(p->value(r, c)));
      }
    }
    ck.tensors.push_back(std::move(t));
  }
  return ck;
}

void RestoreParameters(const Checkpoint& ck, const std::vector<Parameter*>& params) {
  if (ck.tensors.size() != params.size()) {
    throw ParseError("checkpoint '" + ck.module + "' has " + std::to_string(ck.tensors.size()) +
                     " tensors, expected " + std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Tensor& t = ck.tensors[i];
    Parameter& p = *params[i];
    if (t.name != p.name || t.rows != p.value.rows() || t.cols != p.value.cols()) {
      throw ParseError("checkpoint tensor " + t.name + " [" + std::to_string(t.rows) + "x" +
                       std::to_string(t.cols) + "] does not match " + p.name);
    }
    for (int r = 0; r < t.rows; ++r) {
      for (int c = 0; c < t.cols; ++c) {
        p.value(r, c) = static_cast<double>(t.data[static_cast<std::size_t>(r * t.cols + c)]);
      }
    }
    p.ZeroGrad();
  }
}

std::string SerializeCheckpoint(const Checkpoint& ck) {
  const std::string payload = Payload(ck);
  nlohmann::json h;
  h["schema_version"] = kCheckpointSchema;
  h["module"] = ck.module;
  h["seed"] = ck.seed;
  h["metadata"] = ck.metadata;
  h["payload_bytes"] = payload.size();
  h["payload_sha256"] = Sha256Hex(payload);
  nlohmann::json shapes = nlohmann::json::array();
  for (const Tensor& t : ck.tensors) {
    shapes.push_back({{"name", t.name}, {"shape", {t.rows, t.cols}}});
  }
  h["tensors"] = shapes;
  const std::string header = h.dump();
  std::string out(kCheckpointMagic, kMagicLen);
  PutU32(out, static_cast<std::uint32_t>(header.size()));
  out += header;
  out += payload;
  return out;
}

Checkpoint ParseCheckpoint(const std::string& bytes) {
  if (bytes.size() < kMagicLen + 4 || bytes.compare(0, kMagicLen, kCheckpointMagic) != 0) {
    throw ParseError("not a checkpoint (bad magic)");
  }
  const std::uint32_t hlen = GetU32(bytes, kMagicLen);
  const std::size_t body = kMagicLen + 4 + hlen;
  if (bytes.size() < body) throw ParseError("checkpoint header truncated");
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(bytes.substr(kMagicLen + 4, hlen));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("checkpoint header: ") + e.what());
  }
  Checkpoint ck;
  std::size_t expected = 0;
  try {
    if (h.at("schema_version").get<int>() != kCheckpointSchema) {
      throw ParseError("unsupported checkpoint schema " + h.at("schema_version").dump());
    }
    ck.module = h.at("module").get<std::string>();
    ck.seed = h.at("seed").get<std::uint64_t>();
    ck.metadata = h.at("metadata");
    for (const auto& t : h.at("tensors")) {
      Tensor tensor{t.at("name").get<std::string>(), t.at("shape").at(0).get<int>(),
                    t.at("shape").at(1).get<int>(), {}};
      if (tensor.rows < 0 || tensor.cols < 0) throw ParseError("negative tensor shape");
      expected += static_cast<std::size_t>(tensor.rows) * tensor.cols * sizeof(float);
      ck.tensors.push_back(std::move(tensor));
    }
    if (h.at("payload_bytes").get<std::size_t>() != expected) {
      throw ParseError("checkpoint payload_bytes disagrees with tensor shapes");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("checkpoint header: ") + e.what());
  }
  const std::string payload = bytes.substr(body);
  if (payload.size() != expected) {
    throw ParseError("checkpoint payload has " + std::to_string(payload.size()) +
                     " bytes, header declares " + std::to_string(expected));
  }
  if (Sha256Hex(payload) != h["payload_sha256"].get<std::string>()) {
    throw ParseError("checkpoint payload hash mismatch");
  }
  std::size_t at = 0;
  for (Tensor& t : ck.tensors) {
    t.data.resize(static_cast<std::size_t>(t.rows) * t.cols);
    std::memcpy(t.data.data(), payload.data() + at, t.data.size() * sizeof(float));
    at += t.data.size() * sizeof(float);
  }
  return ck;
}

void SaveCheckpoint(const Checkpoint& ck, const std::filesystem::path& path) {
  WriteFileBytes(path, SerializeCheckpoint(ck));
}

Checkpoint LoadCheckpoint(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw MissingArtifact("missing artifact: " + path.string());
  }
  return ParseCheckpoint(ReadFileBytes(path));
}

std::string Sha256Hex(const std::string& bytes) {
  unsigned char md[SHA256_DIGEST_LENGTH];
  SHA256(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size(), md);
  static const char* kHex = "0123456789abcdef";
  std::string out;
  for (unsigned char b : md) {
    out.push_back(kHex[b >> 4]);
    out.push_back(kHex[b & 15]);
  }
  return out;
}

std::string FileSha256(const std::filesystem::path& path) { return Sha256Hex(ReadFileBytes(path)); }

std::string ReadFileBytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingArtifact("missing artifact: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFileBytes(const std::filesystem::path& path, const std::string& bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

}  // namespace pivot
