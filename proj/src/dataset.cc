/*
 * Copyright 2026 The recbench Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "recbench/dataset.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <string_view>
#include <unordered_map>

#include "recbench/errors.h"
#include "recbench/random.h"

namespace recbench {
namespace {

std::vector<std::string_view> Split(std::string_view line,
                                    std::string_view sep) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + sep.size();
  }
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.remove_suffix(1);
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  return s;
}

template <class Int>
bool ParseInt(std::string_view s, Int& out) {
  s = Trim(s);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool ParseReal(std::string_view s, double& out) {
  s = Trim(s);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

struct RawEvent {
  std::int64_t user;
  std::int64_t item;
  double rating;
  std::int64_t timestamp;
};

RawEvent ParseEventLine(std::string_view line, std::string_view sep,
                        const std::string& file, std::size_t line_no) {
  const auto fields = Split(line, sep);
  if (fields.size() != 4) {
    throw ParseError(file, line_no,
                     "expected 4 fields, found " + std::to_string(fields.size()));
  }
  RawEvent e{};
  if (!ParseInt(fields[0], e.user)) throw ParseError(file, line_no, "bad user id");
  if (!ParseInt(fields[1], e.item)) throw ParseError(file, line_no, "bad item id");
  if (!ParseReal(fields[2], e.rating)) throw ParseError(file, line_no, "bad rating");
  if (!ParseInt(fields[3], e.timestamp)) {
    throw ParseError(file, line_no, "bad timestamp");
  }
  return e;
}

std::ifstream OpenOrThrow(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

// Zero-based, order-preserving remapping of arbitrary integer labels.
std::vector<std::int64_t> SortedLabels(std::vector<std::int64_t> labels) {
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  return labels;
}

std::int32_t IndexOf(const std::vector<std::int64_t>& labels, std::int64_t v) {
  return static_cast<std::int32_t>(
      std::lower_bound(labels.begin(), labels.end(), v) - labels.begin());
}

}  // namespace

LogFormat ParseLogFormat(const std::string& name) {
  if (name == "movielens_dat") return LogFormat::kMovielensDat;
  if (name == "tsv_rating") return LogFormat::kTsvRating;
  throw ConfigError("unknown interaction format '" + name + "'");
}

// ---------------------------------------------------------------------------
// SparseMatrix

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols,
                           std::vector<std::size_t> offsets,
                           std::vector<ItemId> indices,
                           std::vector<double> values)
    : rows_(rows),
      cols_(cols),
      offsets_(std::move(offsets)),
      indices_(std::move(indices)),
      values_(std::move(values)) {
  if (offsets_.size() != rows_ + 1 || offsets_.front() != 0 ||
      offsets_.back() != indices_.size() || values_.size() != indices_.size()) {
    throw ContractError("SparseMatrix: inconsistent CSR arrays");
  }
  for (std::size_t r = 0; r < rows_; ++r) {
    if (offsets_[r] > offsets_[r + 1]) {
      throw ContractError("SparseMatrix: decreasing row offsets");
    }
    for (std::size_t k = offsets_[r]; k < offsets_[r + 1]; ++k) {
      if (indices_[k] < 0 || static_cast<std::size_t>(indices_[k]) >= cols_) {
        throw ContractError("SparseMatrix: column index out of range");
      }
      if (k > offsets_[r] && indices_[k] <= indices_[k - 1]) {
        throw ContractError("SparseMatrix: column indices not increasing");
      }
    }
  }
}

SparseMatrix SparseMatrix::FromPairs(
    std::size_t rows, std::size_t cols,
    std::vector<std::pair<UserId, ItemId>> pairs) {
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  std::vector<std::size_t> offsets(rows + 1, 0);
  std::vector<ItemId> indices;
  indices.reserve(pairs.size());
  for (const auto& [r, c] : pairs) {
    if (r < 0 || static_cast<std::size_t>(r) >= rows) {
      throw ContractError("SparseMatrix: row index out of range");
    }
    ++offsets[r + 1];
    indices.push_back(c);
  }
  std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
  std::vector<double> values(indices.size(), 1.0);
  return SparseMatrix(rows, cols, std::move(offsets), std::move(indices),
                      std::move(values));
}

bool SparseMatrix::Contains(std::size_t r, ItemId c) const {
  const auto row = Row(r);
  return std::binary_search(row.begin(), row.end(), c);
}

SparseMatrix SparseMatrix::Transpose() const {
  std::vector<std::size_t> offsets(cols_ + 1, 0);
  for (ItemId c : indices_) ++offsets[c + 1];
  std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
  std::vector<ItemId> indices(indices_.size());
  std::vector<double> values(values_.size());
  std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t k = offsets_[r]; k < offsets_[r + 1]; ++k) {
      const std::size_t dst = cursor[indices_[k]]++;
      indices[dst] = static_cast<ItemId>(r);
      values[dst] = values_[k];
    }
  }
  return SparseMatrix(cols_, rows_, std::move(offsets), std::move(indices),
                      std::move(values));
}

std::vector<std::size_t> SparseMatrix::ColumnCounts() const {
  std::vector<std::size_t> counts(cols_, 0);
  for (ItemId c : indices_) ++counts[c];
  return counts;
}

// ---------------------------------------------------------------------------
// EvaluationPack

const TestCase* EvaluationPack::Find(UserId user) const {
  const auto it = std::lower_bound(
      tests.begin(), tests.end(), user,
      [](const TestCase& t, UserId u) { return t.user < u; });
  return (it != tests.end() && it->user == user) ? &*it : nullptr;
}

void ValidatePack(const EvaluationPack& pack) {
  UserId previous = -1;
  for (const TestCase& t : pack.tests) {
    const std::string who = "user " + std::to_string(t.user);
    if (t.user <= previous) throw DataError("test users not strictly sorted");
    previous = t.user;
    if (static_cast<std::size_t>(t.user) >= pack.num_users()) {
      throw DataError(who + " outside the user range");
    }
    if (t.positive < 0 || static_cast<std::size_t>(t.positive) >= pack.num_items()) {
      throw DataError(who + ": positive outside the catalog");
    }
    if (pack.train.Contains(t.user, t.positive)) {
      throw DataError(who + ": test positive " + std::to_string(t.positive) +
                      " also appears in train");
    }
    if (t.negatives.size() + 1 != pack.candidate_count) {
      throw DataError(who + ": " + std::to_string(t.negatives.size()) +
                      " negatives, expected " +
                      std::to_string(pack.candidate_count - 1));
    }
    std::vector<ItemId> sorted = t.negatives;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw DataError(who + ": duplicate negatives");
    }
    for (ItemId n : t.negatives) {
      if (n < 0 || static_cast<std::size_t>(n) >= pack.num_items()) {
        throw DataError(who + ": negative outside the catalog");
      }
      if (n == t.positive) throw DataError(who + ": negative equals positive");
      if (pack.train.Contains(t.user, n)) {
        throw DataError(who + ": negative " + std::to_string(n) +
                        " appears in train");
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Loading and splitting

InteractionLog LoadInteractions(const std::filesystem::path& path,
                                LogFormat format) {
  std::ifstream in = OpenOrThrow(path);
  const std::string sep = format == LogFormat::kMovielensDat ? "::" : "\t";
  const std::string file = path.string();
  std::vector<RawEvent> raw;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    raw.push_back(ParseEventLine(line, sep, file, line_no));
  }
  if (raw.empty()) throw DataError("empty dataset: " + file);

  InteractionLog log;
  std::vector<std::int64_t> users, items;
  users.reserve(raw.size());
  items.reserve(raw.size());
  for (const RawEvent& e : raw) {
    users.push_back(e.user);
    items.push_back(e.item);
  }
  log.user_labels = SortedLabels(std::move(users));
  log.item_labels = SortedLabels(std::move(items));
  log.num_users = log.user_labels.size();
  log.num_items = log.item_labels.size();

  // Deduplicate (user, item): keep the latest timestamp, later line on ties.
  std::unordered_map<std::uint64_t, std::size_t> slot;
  slot.reserve(raw.size());
  for (const RawEvent& e : raw) {
    Interaction x{IndexOf(log.user_labels, e.user),
                  IndexOf(log.item_labels, e.item), e.rating, e.timestamp};
    const std::uint64_t key =
        (static_cast<std::uint64_t>(x.user) << 32) | static_cast<std::uint32_t>(x.item);
    const auto [it, inserted] = slot.emplace(key, log.events.size());
    if (inserted) {
      log.events.push_back(x);
    } else if (log.events[it->second].timestamp <= x.timestamp) {
      log.events[it->second] = x;
    }
  }
  return log;
}

InteractionLog Binarize(const InteractionLog& log, double threshold) {
  InteractionLog out = log;
  out.events.clear();
  for (const Interaction& e : log.events) {
    if (e.rating >= threshold) {
      Interaction x = e;
      x.rating = 1.0;
      out.events.push_back(x);
    }
  }
  return out;
}

LastEventSplit SplitLastEvent(const InteractionLog& log) {
  LastEventSplit split;
  split.train = log;
  split.train.events.clear();

  std::vector<std::vector<std::size_t>> by_user(log.num_users);
  for (std::size_t k = 0; k < log.events.size(); ++k) {
    by_user[log.events[k].user].push_back(k);
  }
  std::vector<char> held(log.events.size(), 0);
  for (std::size_t u = 0; u < log.num_users; ++u) {
    const auto& idx = by_user[u];
    if (idx.empty()) continue;
    if (idx.size() == 1) {
      split.train_only_users.push_back(static_cast<UserId>(u));
      continue;
    }
    std::size_t last = idx.front();
    for (std::size_t k : idx) {
      const Interaction& a = log.events[k];
      const Interaction& b = log.events[last];
      if (a.timestamp > b.timestamp ||
          (a.timestamp == b.timestamp && a.item > b.item)) {
        last = k;
      }
    }
    held[last] = 1;
    split.held_out.push_back(log.events[last]);
  }
  for (std::size_t k = 0; k < log.events.size(); ++k) {
    if (!held[k]) split.train.events.push_back(log.events[k]);
  }
  return split;
}

EvaluationPack TemporalLeaveOneOut(const InteractionLog& log) {
  LastEventSplit split = SplitLastEvent(log);
  std::vector<std::pair<UserId, ItemId>> pairs;
  pairs.reserve(split.train.events.size());
  for (const Interaction& e : split.train.events) pairs.emplace_back(e.user, e.item);

  EvaluationPack pack;
  pack.train = SparseMatrix::FromPairs(log.num_users, log.num_items, std::move(pairs));
  for (const Interaction& e : split.held_out) {
    pack.tests.push_back(TestCase{e.user, e.item, {}, e.rating, e.timestamp});
  }
  pack.candidate_count = 1;
  pack.train_only_users = std::move(split.train_only_users);
  return pack;
}

EvaluationPack SampleTestNegatives(EvaluationPack pack, std::size_t n,
                                   std::uint64_t seed) {
  Rng rng(seed);
  std::vector<ItemId> pool;
  for (TestCase& t : pack.tests) {
    pool.clear();
    const auto row = pack.train.Row(t.user);
    auto cursor = row.begin();
    for (ItemId i = 0; static_cast<std::size_t>(i) < pack.num_items(); ++i) {
      while (cursor != row.end() && *cursor < i) ++cursor;
      if ((cursor != row.end() && *cursor == i) || i == t.positive) continue;
      pool.push_back(i);
    }
    if (pool.size() < n) {
      throw ProtocolError("user " + std::to_string(t.user) + " has only " +
                          std::to_string(pool.size()) +
                          " non-consumed items, cannot sample " +
                          std::to_string(n) + " negatives");
    }
    // Partial Fisher-Yates: the first n slots become the sample.
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t j = k + rng.UniformIndex(pool.size() - k);
      std::swap(pool[k], pool[j]);
    }
    t.negatives.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n));
  }
  pack.candidate_count = n + 1;
  return pack;
}

EvaluationPack LoadNcfSplit(const std::filesystem::path& dir, std::string name) {
  if (name.empty()) {
    if (!std::filesystem::is_directory(dir)) {
      throw DataError("not a directory: " + dir.string());
    }
    const std::string suffix = ".train.rating";
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
      const std::string f = entry.path().filename().string();
      if (f.size() > suffix.size() &&
          f.compare(f.size() - suffix.size(), suffix.size(), suffix) == 0) {
        if (!name.empty()) throw DataError("several *.train.rating files in " + dir.string());
        name = f.substr(0, f.size() - suffix.size());
      }
    }
    if (name.empty()) throw DataError("no *.train.rating file in " + dir.string());
  }
  const auto train_path = dir / (name + ".train.rating");
  const auto test_path = dir / (name + ".test.rating");
  const auto neg_path = dir / (name + ".test.negative");
  for (const auto& p : {train_path, test_path, neg_path}) {
    if (!std::filesystem::exists(p)) throw DataError("missing file " + p.string());
  }

  std::int64_t max_user = -1, max_item = -1;
  auto track = [&](std::int64_t u, std::int64_t i, const std::string& file,
                   std::size_t line_no) {
    if (u < 0 || i < 0 || u > INT32_MAX || i > INT32_MAX) {
      throw ParseError(file, line_no, "id out of range");
    }
    max_user = std::max(max_user, u);
    max_item = std::max(max_item, i);
  };

  std::vector<std::pair<UserId, ItemId>> train_pairs;
  {
    std::ifstream in = OpenOrThrow(train_path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (Trim(line).empty()) continue;
      const RawEvent e = ParseEventLine(line, "\t", train_path.string(), line_no);
      track(e.user, e.item, train_path.string(), line_no);
      train_pairs.emplace_back(static_cast<UserId>(e.user), static_cast<ItemId>(e.item));
    }
    if (train_pairs.empty()) throw DataError("empty dataset: " + train_path.string());
  }

  std::map<UserId, TestCase> tests;
  {
    std::ifstream in = OpenOrThrow(test_path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (Trim(line).empty()) continue;
      const RawEvent e = ParseEventLine(line, "\t", test_path.string(), line_no);
      track(e.user, e.item, test_path.string(), line_no);
      TestCase t{static_cast<UserId>(e.user), static_cast<ItemId>(e.item), {},
                 e.rating, e.timestamp};
      if (!tests.emplace(t.user, t).second) {
        throw ParseError(test_path.string(), line_no,
                         "second test entry for user " + std::to_string(t.user));
      }
    }
  }

  std::size_t negatives_per_user = 0;
  bool first = true;
  std::vector<char> seen(tests.empty() ? 0 : tests.rbegin()->first + 1, 0);
  {
    std::ifstream in = OpenOrThrow(neg_path);
    const std::string file = neg_path.string();
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const std::string_view text = Trim(line);
      if (text.empty()) continue;
      auto fields = Split(text, "\t");
      const std::string_view key = Trim(fields[0]);
      if (key.size() < 5 || key.front() != '(' || key.back() != ')') {
        throw ParseError(file, line_no, "expected leading (user,item) token");
      }
      const auto parts = Split(key.substr(1, key.size() - 2), ",");
      std::int64_t u = 0, i = 0;
      if (parts.size() != 2 || !ParseInt(parts[0], u) || !ParseInt(parts[1], i)) {
        throw ParseError(file, line_no, "bad (user,item) token");
      }
      const auto it = tests.find(static_cast<UserId>(u));
      if (it == tests.end() || it->second.positive != i) {
        throw DataError(file + ":" + std::to_string(line_no) + ": key (" +
                        std::to_string(u) + "," + std::to_string(i) +
                        ") disagrees with " + test_path.filename().string());
      }
      if (seen[u]) throw ParseError(file, line_no, "duplicate user line");
      seen[u] = 1;
      std::vector<ItemId>& negs = it->second.negatives;
      for (std::size_t f = 1; f < fields.size(); ++f) {
        if (Trim(fields[f]).empty()) continue;
        std::int64_t n = 0;
        if (!ParseInt(fields[f], n)) throw ParseError(file, line_no, "bad negative id");
        track(u, n, file, line_no);
        negs.push_back(static_cast<ItemId>(n));
      }
      if (first) {
        negatives_per_user = negs.size();
        first = false;
      } else if (negs.size() != negatives_per_user) {
        throw DataError(file + ":" + std::to_string(line_no) + ": " +
                        std::to_string(negs.size()) + " negatives, previous lines had " +
                        std::to_string(negatives_per_user));
      }
    }
  }
  for (const auto& [u, t] : tests) {
    if (!seen[u]) throw DataError("no negatives line for test user " + std::to_string(u));
  }

  EvaluationPack pack;
  pack.train = SparseMatrix::FromPairs(static_cast<std::size_t>(max_user + 1),
                                       static_cast<std::size_t>(max_item + 1),
                                       std::move(train_pairs));
  for (auto& [u, t] : tests) pack.tests.push_back(std::move(t));
  pack.candidate_count = negatives_per_user + 1;
  for (std::size_t u = 0; u < pack.num_users(); ++u) {
    if (pack.Find(static_cast<UserId>(u)) == nullptr && pack.train.RowSize(u) > 0) {
      pack.train_only_users.push_back(static_cast<UserId>(u));
    }
  }
  ValidatePack(pack);
  return pack;
}

void WriteNcfSplit(const EvaluationPack& pack, const std::filesystem::path& dir,
                   const std::string& name) {
  std::filesystem::create_directories(dir);
  auto open = [&](const std::string& suffix) {
    std::ofstream out(dir / (name + suffix));
    if (!out) throw DataError("cannot write " + (dir / (name + suffix)).string());
    out.precision(17);
    return out;
  };
  {
    std::ofstream out = open(".train.rating");
    for (std::size_t u = 0; u < pack.num_users(); ++u) {
      const auto row = pack.train.Row(u);
      const auto vals = pack.train.RowValues(u);
      for (std::size_t k = 0; k < row.size(); ++k) {
        out << u << '\t' << row[k] << '\t' << vals[k] << "\t0\n";
      }
    }
  }
  {
    std::ofstream out = open(".test.rating");
    for (const TestCase& t : pack.tests) {
      out << t.user << '\t' << t.positive << '\t' << t.rating << '\t'
          << t.timestamp << '\n';
    }
  }
  {
    std::ofstream out = open(".test.negative");
    for (const TestCase& t : pack.tests) {
      out << '(' << t.user << ',' << t.positive << ')';
      for (ItemId n : t.negatives) out << '\t' << n;
      out << '\n';
    }
  }
}

PopularityProfile BuildPopularityProfile(const SparseMatrix& train,
                                         double head_fraction) {
  if (!(head_fraction > 0.0 && head_fraction < 1.0)) {
    throw ContractError("head_fraction must lie in (0, 1)");
  }
  PopularityProfile profile;
  profile.head_fraction = head_fraction;
  profile.counts = train.ColumnCounts();
  const std::size_t n = profile.counts.size();
  std::vector<ItemId> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](ItemId a, ItemId b) {
    return profile.counts[a] > profile.counts[b];
  });
  // Guard against 0.2 * 10 landing a hair above 2.
  const double exact = head_fraction * static_cast<double>(n);
  const auto head_size = std::min<std::size_t>(
      n, static_cast<std::size_t>(std::ceil(exact - 1e-9 * std::max(1.0, exact))));
  profile.is_head.assign(n, 0);
  for (std::size_t k = 0; k < head_size; ++k) profile.is_head[order[k]] = 1;
  for (ItemId i = 0; static_cast<std::size_t>(i) < n; ++i) {
    (profile.is_head[i] ? profile.head : profile.tail).push_back(i);
  }
  return profile;
}

std::uint64_t FingerprintFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::uint64_t hash = 1469598103934665603ULL;
  char buffer[1 << 16];
  while (in) {
    in.read(buffer, sizeof(buffer));
    for (std::streamsize k = 0; k < in.gcount(); ++k) {
      hash ^= static_cast<unsigned char>(buffer[k]);
      hash *= 1099511628211ULL;
    }
  }
  return hash;
}

}  // namespace recbench
