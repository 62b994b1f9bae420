// Copyright 2026-present the invcf project
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

#include "invcf/encoders/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "invcf/error.hpp"

namespace invcf::encoders {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

namespace {

template <typename T>
void write_raw(std::ostream& out, std::span<const T> values) {
  out.write(reinterpret_cast<const char*>(values.data()),
            std::streamsize(values.size() * sizeof(T)));
}

template <typename T>
void read_raw(std::istream& in, std::span<T> values, const std::filesystem::path& path) {
  in.read(reinterpret_cast<char*>(values.data()), std::streamsize(values.size() * sizeof(T)));
  if (!in) fail(ErrorCode::format, "truncated checkpoint " + path.string());
}

template <typename Real>
nlohmann::json header_of(const ModelParams<Real>& p) {
  return {{"scalar", sizeof(Real) == 4 ? "float32" : "float64"},
          {"backbone", to_string(p.backbone)},
          {"layers", p.layers},
          {"dim", p.dim},
          {"seed", p.seed},
          {"n_users", p.n_users()},
          {"n_items", p.n_items()},
          {"n_user_categories", p.pop_user.rows()},
          {"n_item_categories", p.pop_item.rows()}};
}

template <typename Real>
void write_tables(std::ostream& out, const ModelParams<Real>& p) {
  for (const auto* t : {&p.pref_user, &p.pref_item, &p.pop_user, &p.pop_item}) {
    write_raw<Real>(out, t->values());
  }
  write_raw<std::uint32_t>(out, p.user_category_of);
  write_raw<std::uint32_t>(out, p.item_category_of);
}

template <typename Real>
ModelParams<Real> read_tables(std::istream& in, const nlohmann::json& h,
                              const std::filesystem::path& path) {
  ModelParams<Real> p;
  p.backbone = parse_backbone(h.at("backbone").get<std::string>());
  p.layers = h.at("layers").get<std::uint32_t>();
  p.dim = h.at("dim").get<std::size_t>();
  p.seed = h.at("seed").get<std::uint64_t>();
  const auto n_users = h.at("n_users").get<std::size_t>();
  const auto n_items = h.at("n_items").get<std::size_t>();
  p.pref_user = Matrix<Real>(n_users, p.dim);
  p.pref_item = Matrix<Real>(n_items, p.dim);
  p.pop_user = Matrix<Real>(h.at("n_user_categories").get<std::size_t>(), p.dim);
  p.pop_item = Matrix<Real>(h.at("n_item_categories").get<std::size_t>(), p.dim);
  for (auto* t : {&p.pref_user, &p.pref_item, &p.pop_user, &p.pop_item}) {
    read_raw<Real>(in, t->values(), path);
  }
  p.user_category_of.resize(n_users);
  p.item_category_of.resize(n_items);
  read_raw<std::uint32_t>(in, p.user_category_of, path);
  read_raw<std::uint32_t>(in, p.item_category_of, path);
  p.validate();
  return p;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  nlohmann::json header = std::visit([](const auto& p) { return header_of(p); }, ckpt.params);
  header["user_ids"] = ckpt.user_ids;
  header["item_ids"] = ckpt.item_ids;
  header["metadata"] = ckpt.metadata;
  const std::string text = header.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::io, "cannot write checkpoint " + path.string());
  out << kCheckpointMagic << '\n';
  const std::uint64_t length = text.size();
  out.write(reinterpret_cast<const char*>(&length), sizeof length);
  out.write(text.data(), std::streamsize(text.size()));
  std::visit([&](const auto& p) { write_tables(out, p); }, ckpt.params);
  if (!out) fail(ErrorCode::io, "failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot read checkpoint " + path.string());
  std::string magic;
  std::getline(in, magic);
  if (magic != kCheckpointMagic) {
    fail(ErrorCode::format, path.string() + " is not an " + std::string(kCheckpointMagic) + " checkpoint");
  }
  std::uint64_t length = 0;
  in.read(reinterpret_cast<char*>(&length), sizeof length);
  if (!in || length > (std::uint64_t(1) << 34)) fail(ErrorCode::format, "bad checkpoint header length");
  std::string text(length, '\0');
  in.read(text.data(), std::streamsize(length));
  if (!in) fail(ErrorCode::format, "truncated checkpoint header");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::format, std::string("checkpoint header: ") + e.what());
  }
  Checkpoint ckpt;
  try {
    const auto scalar = header.at("scalar").get<std::string>();
    if (scalar == "float32") {
      ckpt.params = read_tables<float>(in, header, path);
    } else if (scalar == "float64") {
      ckpt.params = read_tables<double>(in, header, path);
    } else {
      fail(ErrorCode::format, "unknown checkpoint scalar type " + scalar);
    }
    ckpt.user_ids = header.at("user_ids").get<std::vector<std::string>>();
    ckpt.item_ids = header.at("item_ids").get<std::vector<std::string>>();
    ckpt.metadata = header.value("metadata", nlohmann::json::object());
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::format, std::string("checkpoint header: ") + e.what());
  }
  return ckpt;
}

}  // namespace invcf::encoders
