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

#include "invcf/dataio/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "invcf/error.hpp"

namespace invcf::dataio {

Index IndexMap::intern(std::string_view id) {
  std::string key(id);
  if (auto it = index_.find(key); it != index_.end()) return it->second;
  const auto index = static_cast<Index>(ids_.size());
  ids_.push_back(key);
  index_.emplace(std::move(key), index);
  return index;
}

std::optional<Index> IndexMap::find(std::string_view id) const {
  if (auto it = index_.find(std::string(id)); it != index_.end()) return it->second;
  return std::nullopt;
}

InteractionDataset::InteractionDataset()
    : users_(std::make_shared<IndexMap>()), items_(std::make_shared<IndexMap>()) {}

InteractionDataset::InteractionDataset(std::shared_ptr<const IndexMap> users,
                                       std::shared_ptr<const IndexMap> items,
                                       std::vector<Interaction> records)
    : users_(std::move(users)), items_(std::move(items)), records_(std::move(records)) {
  if (!users_ || !items_) fail(ErrorCode::invalid_input, "dataset requires index maps");
  for (const auto& r : records_) {
    if (r.user >= users_->size() || r.item >= items_->size()) {
      fail(ErrorCode::index, "interaction index outside the index maps");
    }
  }
}

InteractionDataset InteractionDataset::with_records(std::vector<Interaction> records) const {
  return InteractionDataset(users_, items_, std::move(records));
}

bool InteractionDataset::has_ratings() const noexcept {
  return std::all_of(records_.begin(), records_.end(),
                     [](const Interaction& r) { return r.rating.has_value(); });
}

bool InteractionDataset::has_timestamps() const noexcept {
  return std::all_of(records_.begin(), records_.end(),
                     [](const Interaction& r) { return r.timestamp.has_value(); });
}

bool InteractionDataset::has_duplicate_pairs() const {
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(records_.size());
  for (const auto& r : records_) {
    const std::uint64_t key = (std::uint64_t{r.user} << 32) | r.item;
    if (!seen.insert(key).second) return true;
  }
  return false;
}

std::vector<std::vector<Index>> InteractionDataset::items_by_user() const {
  std::vector<std::vector<Index>> out(n_users());
  for (const auto& r : records_) out[r.user].push_back(r.item);
  for (auto& items : out) std::sort(items.begin(), items.end());
  return out;
}

ColumnLayout ColumnLayout::parse(std::string_view code) {
  ColumnLayout layout;
  std::optional<std::size_t> user, item;
  for (std::size_t col = 0; col < code.size(); ++col) {
    switch (code[col]) {
      case 'u':
        user = col;
        break;
      case 'i':
        item = col;
        break;
      case 'r':
        layout.rating = col;
        break;
      case 't':
        layout.timestamp = col;
        break;
      case 'x':
        break;
      default:
        fail(ErrorCode::config, "unknown column code '" + std::string(1, code[col]) +
                                    "' in layout " + std::string(code));
    }
  }
  if (!user || !item) {
    fail(ErrorCode::config, "layout needs user and item columns: " + std::string(code));
  }
  layout.user = *user;
  layout.item = *item;
  return layout;
}

std::string ColumnLayout::code() const {
  std::string out(min_columns(), 'x');
  out[user] = 'u';
  out[item] = 'i';
  if (rating) out[*rating] = 'r';
  if (timestamp) out[*timestamp] = 't';
  return out;
}

std::size_t ColumnLayout::min_columns() const noexcept {
  std::size_t n = std::max(user, item) + 1;
  if (rating) n = std::max(n, *rating + 1);
  if (timestamp) n = std::max(n, *timestamp + 1);
  return n;
}

namespace {

enum class Delimiter { tab, comma, whitespace };

Delimiter detect_delimiter(std::string_view line) {
  if (line.find('\t') != std::string_view::npos) return Delimiter::tab;
  if (line.find(',') != std::string_view::npos) return Delimiter::comma;
  return Delimiter::whitespace;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

void split_fields(std::string_view line, Delimiter delim, std::vector<std::string_view>& out) {
  out.clear();
  if (delim == Delimiter::whitespace) {
    std::size_t pos = 0;
    while (pos < line.size()) {
      const auto start = line.find_first_not_of(" \t", pos);
      if (start == std::string_view::npos) break;
      auto end = line.find_first_of(" \t", start);
      if (end == std::string_view::npos) end = line.size();
      out.push_back(line.substr(start, end - start));
      pos = end;
    }
    return;
  }
  const char sep = delim == Delimiter::tab ? '\t' : ',';
  std::size_t start = 0;
  while (true) {
    const auto end = line.find(sep, start);
    out.push_back(trim(line.substr(start, end == std::string_view::npos ? end : end - start)));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
}

template <typename T>
bool parse_number(std::string_view field, T& value) {
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, value);
  return ec == std::errc() && ptr == end;
}

}  // namespace

InteractionDataset parse_interactions(std::string_view text, const LoadOptions& options) {
  const ColumnLayout& layout = options.layout;
  const bool fixed = options.fixed_users && options.fixed_items;
  auto users = std::make_shared<IndexMap>();
  auto items = std::make_shared<IndexMap>();

  std::vector<Interaction> records;
  std::vector<std::string_view> fields;
  std::optional<Delimiter> delim;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty() || line.front() == '#') {
      if (eol == text.size()) break;
      continue;
    }
    if (!delim) delim = detect_delimiter(line);
    split_fields(line, *delim, fields);
    if (fields.size() < layout.min_columns()) {
      throw ParseError(line_no, "expected at least " + std::to_string(layout.min_columns()) +
                                    " columns, found " + std::to_string(fields.size()));
    }
    const auto user_id = fields[layout.user];
    const auto item_id = fields[layout.item];
    if (user_id.empty() || item_id.empty()) throw ParseError(line_no, "empty user or item id");

    Interaction rec;
    if (fixed) {
      const auto u = options.fixed_users->find(user_id);
      const auto i = options.fixed_items->find(item_id);
      if (!u) throw ParseError(line_no, "unknown user id '" + std::string(user_id) + "'");
      if (!i) throw ParseError(line_no, "unknown item id '" + std::string(item_id) + "'");
      rec.user = *u;
      rec.item = *i;
    } else {
      rec.user = users->intern(user_id);
      rec.item = items->intern(item_id);
    }
    if (layout.rating) {
      double rating = 0;
      if (!parse_number(fields[*layout.rating], rating)) {
        throw ParseError(line_no, "bad rating '" + std::string(fields[*layout.rating]) + "'");
      }
      rec.rating = rating;
    }
    if (layout.timestamp) {
      const auto field = fields[*layout.timestamp];
      std::int64_t ts = 0;
      if (!parse_number(field, ts)) {
        double tsd = 0;
        if (!parse_number(field, tsd)) {
          throw ParseError(line_no, "bad timestamp '" + std::string(field) + "'");
        }
        ts = static_cast<std::int64_t>(tsd);
      }
      rec.timestamp = ts;
    }
    records.push_back(rec);
    if (eol == text.size()) break;
  }
  if (fixed) {
    return InteractionDataset(options.fixed_users, options.fixed_items, std::move(records));
  }
  return InteractionDataset(std::move(users), std::move(items), std::move(records));
}

InteractionDataset load_interactions(const std::filesystem::path& path,
                                     const LoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) fail(ErrorCode::io, "read failure on " + path.string());
  return parse_interactions(buffer.str(), options);
}

ColumnLayout write_interactions(const std::filesystem::path& path,
                                const InteractionDataset& dataset) {
  ColumnLayout layout;
  const bool ratings = !dataset.empty() && dataset.has_ratings();
  const bool timestamps = !dataset.empty() && dataset.has_timestamps();
  std::size_t next = 2;
  if (ratings) layout.rating = next++;
  if (timestamps) layout.timestamp = next++;

  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::io, "cannot write " + path.string());
  char buf[32];
  for (const auto& r : dataset.records()) {
    out << dataset.users().id(r.user) << '\t' << dataset.items().id(r.item);
    if (ratings) {
      auto [end, ec] = std::to_chars(buf, buf + sizeof buf, *r.rating);
      out << '\t' << std::string_view(buf, end - buf);
    }
    if (timestamps) out << '\t' << *r.timestamp;
    out << '\n';
  }
  if (!out) fail(ErrorCode::io, "write failure on " + path.string());
  return layout;
}

void write_index_map(const std::filesystem::path& path, const IndexMap& map) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::io, "cannot write " + path.string());
  for (const auto& id : map.ids()) out << id << '\n';
  if (!out) fail(ErrorCode::io, "write failure on " + path.string());
}

std::shared_ptr<const IndexMap> read_index_map(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot read " + path.string());
  auto map = std::make_shared<IndexMap>();
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (map->find(line)) throw ParseError(line_no, "duplicate id '" + line + "'");
    map->intern(line);
  }
  return map;
}

}  // namespace invcf::dataio
