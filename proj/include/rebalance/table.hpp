#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "rebalance/error.hpp"

namespace rebalance {

enum class ColumnKind { Numeric, Categorical };

inline std::string_view to_string(ColumnKind kind) {
  return kind == ColumnKind::Numeric ? "numeric" : "categorical";
}

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::Numeric;

  bool operator==(const ColumnSpec&) const = default;
};

// Category label used for empty categorical cells.
inline constexpr std::string_view kMissingCategory = "_missing_";

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

// Shortest representation that parses back to the same double.
inline std::string format_double(double value) {
  char buffer[64];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, ptr);
}

}  // namespace detail

class Schema {
 public:
  Schema() = default;

  Schema(std::vector<ColumnSpec> columns, std::string target, std::string positive_label)
      : columns_(std::move(columns)),
        target_(std::move(target)),
        positive_label_(std::move(positive_label)) {
    for (std::size_t i = 0; i < columns_.size(); ++i) {
      if (columns_[i].name.empty()) fail(ErrorCode::InvalidSchema, "empty column name");
      if (!index_.emplace(columns_[i].name, i).second) {
        fail(ErrorCode::InvalidSchema, "duplicate column '" + columns_[i].name + "'");
      }
    }
    auto it = index_.find(target_);
    if (it == index_.end()) fail(ErrorCode::InvalidSchema, "target '" + target_ + "' is not a column");
    if (columns_[it->second].kind != ColumnKind::Categorical) {
      fail(ErrorCode::InvalidSchema, "target '" + target_ + "' must be categorical");
    }
    if (positive_label_.empty()) fail(ErrorCode::InvalidSchema, "positive_label is empty");
    target_index_ = it->second;
  }

  const std::vector<ColumnSpec>& columns() const { return columns_; }
  std::size_t size() const { return columns_.size(); }
  const ColumnSpec& column(std::size_t i) const { return columns_.at(i); }
  const std::string& target() const { return target_; }
  std::size_t target_index() const { return target_index_; }
  const std::string& positive_label() const { return positive_label_; }

  std::optional<std::size_t> find(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t index_of(std::string_view name) const {
    auto i = find(name);
    if (!i) fail(ErrorCode::UnknownColumn, "no column '" + std::string(name) + "'");
    return *i;
  }

  // Non-target columns, in schema order.
  std::vector<std::size_t> feature_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < columns_.size(); ++i) {
      if (i != target_index_) out.push_back(i);
    }
    return out;
  }

  bool operator==(const Schema& other) const {
    return columns_ == other.columns_ && target_ == other.target_ &&
           positive_label_ == other.positive_label_;
  }

  // Text format, one entry per line:
  //   <name>:<numeric|categorical>
  //   target: <column name>
  //   positive_label: <label>
  // Blank lines and lines starting with '#' are ignored. "target" and
  // "positive_label" are reserved keys. Column order is line order.
  static Schema parse(std::istream& in) {
    std::vector<ColumnSpec> columns;
    std::optional<std::string> target;
    std::optional<std::string> positive;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      auto view = detail::trim(line);
      if (view.empty() || view.front() == '#') continue;
      auto colon = view.find(':');
      if (colon == std::string_view::npos) {
        fail(ErrorCode::InvalidSchema, "line " + std::to_string(line_no) + ": expected key:value");
      }
      auto key = std::string(detail::trim(view.substr(0, colon)));
      auto value = std::string(detail::trim(view.substr(colon + 1)));
      if (key == "target") {
        target = value;
      } else if (key == "positive_label") {
        positive = value;
      } else if (value == "numeric") {
        columns.push_back({key, ColumnKind::Numeric});
      } else if (value == "categorical") {
        columns.push_back({key, ColumnKind::Categorical});
      } else {
        fail(ErrorCode::InvalidSchema,
             "line " + std::to_string(line_no) + ": unknown kind '" + value + "'");
      }
    }
    if (!target) fail(ErrorCode::InvalidSchema, "missing 'target:' entry");
    if (!positive) fail(ErrorCode::InvalidSchema, "missing 'positive_label:' entry");
    return Schema(std::move(columns), *target, *positive);
  }

  void write(std::ostream& out) const {
    for (const auto& c : columns_) out << c.name << ':' << to_string(c.kind) << '\n';
    out << "target: " << target_ << '\n';
    out << "positive_label: " << positive_label_ << '\n';
  }

 private:
  std::vector<ColumnSpec> columns_;
  std::unordered_map<std::string, std::size_t> index_;
  std::string target_;
  std::size_t target_index_ = 0;
  std::string positive_label_;
};

inline Schema load_schema(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open schema '" + path + "'");
  return Schema::parse(in);
}

// Code -> string mapping for one categorical column. Codes are dense and
// assigned in insertion order.
class Dictionary {
 public:
  Dictionary() = default;
  explicit Dictionary(std::vector<std::string> values) {
    for (auto& v : values) add(std::move(v));
  }

  std::size_t size() const { return values_.size(); }
  const std::string& value(std::int32_t code) const { return values_.at(static_cast<std::size_t>(code)); }
  const std::vector<std::string>& values() const { return values_; }

  std::optional<std::int32_t> find(std::string_view s) const {
    auto it = index_.find(std::string(s));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::int32_t add(std::string s) {
    auto it = index_.find(s);
    if (it != index_.end()) return it->second;
    auto code = static_cast<std::int32_t>(values_.size());
    index_.emplace(s, code);
    values_.push_back(std::move(s));
    return code;
  }

  bool operator==(const Dictionary& other) const { return values_ == other.values_; }

 private:
  std::vector<std::string> values_;
  std::unordered_map<std::string, std::int32_t> index_;
};

using DictionaryPtr = std::shared_ptr<const Dictionary>;

// Storage for one column. Exactly one of `numeric` / `codes` is used,
// according to the schema kind; `dictionary` is set for categoricals only.
struct Column {
  std::vector<double> numeric;
  std::vector<std::int32_t> codes;
  DictionaryPtr dictionary;
};

// Immutable columnar table. Derived tables share dictionaries with their
// parent, so codes are comparable across every table derived from one load.
class Table {
 public:
  Table() = default;

  Table(Schema schema, std::vector<Column> columns)
      : schema_(std::move(schema)), columns_(std::move(columns)) {
    if (columns_.size() != schema_.size()) {
      fail(ErrorCode::SchemaMismatch, "column count does not match schema");
    }
    n_rows_ = 0;
    for (std::size_t j = 0; j < columns_.size(); ++j) {
      const auto& col = columns_[j];
      std::size_t len = 0;
      if (schema_.column(j).kind == ColumnKind::Numeric) {
        len = col.numeric.size();
      } else {
        if (!col.dictionary) fail(ErrorCode::SchemaMismatch, "categorical column without dictionary");
        len = col.codes.size();
        const auto card = static_cast<std::int32_t>(col.dictionary->size());
        for (auto c : col.codes) {
          if (c < 0 || c >= card) {
            fail(ErrorCode::SchemaMismatch, "invalid code in column '" + schema_.column(j).name + "'");
          }
        }
      }
      if (j == 0) n_rows_ = len;
      if (len != n_rows_) fail(ErrorCode::SchemaMismatch, "ragged columns");
    }
    const auto& target_dict = *columns_[schema_.target_index()].dictionary;
    auto pos = target_dict.find(schema_.positive_label());
    if (!pos) {
      fail(ErrorCode::InvalidTarget,
           "positive label '" + schema_.positive_label() + "' not among target categories");
    }
    positive_code_ = *pos;
  }

  const Schema& schema() const { return schema_; }
  std::size_t n_rows() const { return n_rows_; }
  std::size_t n_columns() const { return columns_.size(); }
  ColumnKind kind(std::size_t j) const { return schema_.column(j).kind; }
  const std::string& name(std::size_t j) const { return schema_.column(j).name; }

  std::span<const double> numeric(std::size_t j) const { return columns_.at(j).numeric; }
  std::span<const std::int32_t> codes(std::size_t j) const { return columns_.at(j).codes; }
  const Dictionary& dictionary(std::size_t j) const { return *columns_.at(j).dictionary; }
  const DictionaryPtr& dictionary_ptr(std::size_t j) const { return columns_.at(j).dictionary; }
  const Column& column(std::size_t j) const { return columns_.at(j); }

  std::size_t target_index() const { return schema_.target_index(); }
  std::int32_t positive_code() const { return positive_code_; }
  bool is_positive(std::size_t row) const {
    return columns_[schema_.target_index()].codes[row] == positive_code_;
  }

  std::vector<std::size_t> rows_of_class(bool positive) const {
    std::vector<std::size_t> out;
    for (std::size_t r = 0; r < n_rows_; ++r) {
      if (is_positive(r) == positive) out.push_back(r);
    }
    return out;
  }

  std::string cell(std::size_t row, std::size_t j) const {
    if (kind(j) == ColumnKind::Numeric) return detail::format_double(columns_[j].numeric[row]);
    return columns_[j].dictionary->value(columns_[j].codes[row]);
  }

  // New table holding the given rows (repeats allowed), in the given order.
  Table take(std::span<const std::size_t> rows) const {
    std::vector<Column> cols(columns_.size());
    for (std::size_t j = 0; j < columns_.size(); ++j) {
      cols[j].dictionary = columns_[j].dictionary;
      if (kind(j) == ColumnKind::Numeric) {
        cols[j].numeric.reserve(rows.size());
        for (auto r : rows) cols[j].numeric.push_back(columns_[j].numeric.at(r));
      } else {
        cols[j].codes.reserve(rows.size());
        for (auto r : rows) cols[j].codes.push_back(columns_[j].codes.at(r));
      }
    }
    return Table(schema_, std::move(cols));
  }

  Table empty_like() const { return take(std::span<const std::size_t>{}); }

 private:
  Schema schema_;
  std::vector<Column> columns_;
  std::size_t n_rows_ = 0;
  std::int32_t positive_code_ = 0;
};

// Accumulates rows that share the schema and dictionaries of a prototype.
class TableBuilder {
 public:
  explicit TableBuilder(const Table& prototype) : schema_(prototype.schema()) {
    columns_.resize(prototype.n_columns());
    for (std::size_t j = 0; j < columns_.size(); ++j) {
      columns_[j].dictionary = prototype.dictionary_ptr(j);
    }
  }

  std::vector<double>& numeric(std::size_t j) { return columns_.at(j).numeric; }
  std::vector<std::int32_t>& codes(std::size_t j) { return columns_.at(j).codes; }

  void append_row(const Table& source, std::size_t row) {
    for (std::size_t j = 0; j < columns_.size(); ++j) {
      if (schema_.column(j).kind == ColumnKind::Numeric) {
        columns_[j].numeric.push_back(source.numeric(j)[row]);
      } else {
        columns_[j].codes.push_back(source.codes(j)[row]);
      }
    }
  }

  void reserve(std::size_t n) {
    for (std::size_t j = 0; j < columns_.size(); ++j) {
      if (schema_.column(j).kind == ColumnKind::Numeric) {
        columns_[j].numeric.reserve(n);
      } else {
        columns_[j].codes.reserve(n);
      }
    }
  }

  Table finish() && { return Table(std::move(schema_), std::move(columns_)); }

 private:
  Schema schema_;
  std::vector<Column> columns_;
};

// ---------------------------------------------------------------------------
// CSV

namespace detail {

// RFC-4180 record reader. Returns false at end of input. Unquoted fields are
// trimmed of surrounding blanks; quoted fields are taken verbatim.
inline bool read_csv_record(std::istream& in, std::vector<std::string>& fields, std::size_t& line_no) {
  fields.clear();
  std::string field;
  bool quoted = false;
  bool in_quotes = false;
  bool any = false;
  auto finish_field = [&] {
    fields.push_back(quoted ? field : std::string(trim(field)));
    field.clear();
    quoted = false;
  };
  int ch = 0;
  while ((ch = in.get()) != EOF) {
    any = true;
    const char c = static_cast<char>(ch);
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          field.push_back('"');
          in.get();
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line_no;
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && trim(field).empty()) {
      field.clear();
      quoted = true;
      in_quotes = true;
    } else if (c == ',') {
      finish_field();
    } else if (c == '\n') {
      ++line_no;
      finish_field();
      return true;
    } else if (c == '\r') {
      if (in.peek() == '\n') continue;
      ++line_no;
      finish_field();
      return true;
    } else if (!quoted) {
      field.push_back(c);
    }
  }
  if (in_quotes) fail(ErrorCode::MalformedCsv, "unterminated quote near line " + std::to_string(line_no));
  if (!any) return false;
  finish_field();
  ++line_no;
  return true;
}

inline bool blank_record(const std::vector<std::string>& fields) {
  return fields.size() == 1 && fields[0].empty();
}

inline void write_csv_field(std::ostream& out, std::string_view s) {
  const bool needs_quotes =
      s.find_first_of(",\"\r\n") != std::string_view::npos ||
      (!s.empty() && (s.front() == ' ' || s.back() == ' ' || s.front() == '\t' || s.back() == '\t'));
  if (!needs_quotes) {
    out << s;
    return;
  }
  out << '"';
  for (char c : s) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

}  // namespace detail

// Reads a headered CSV under `schema`. CSV columns not named in the schema are
// ignored; the returned table follows schema column order. Categorical
// dictionaries are built in first-appearance order; empty categorical cells
// become "_missing_"; empty or unparsable numeric cells are errors.
inline Table read_csv(std::istream& in, const Schema& schema) {
  std::vector<std::string> fields;
  std::size_t line_no = 0;
  bool have_header = false;
  while (detail::read_csv_record(in, fields, line_no)) {
    if (!detail::blank_record(fields)) {
      have_header = true;
      break;
    }
  }
  if (!have_header) fail(ErrorCode::EmptyFile, "no header row");

  std::unordered_map<std::string, std::size_t> header;
  for (std::size_t i = 0; i < fields.size(); ++i) header.emplace(fields[i], i);
  std::vector<std::size_t> source(schema.size());
  for (std::size_t j = 0; j < schema.size(); ++j) {
    auto it = header.find(schema.column(j).name);
    if (it == header.end()) fail(ErrorCode::MissingColumn, "column '" + schema.column(j).name + "' not in header");
    source[j] = it->second;
  }

  std::vector<Column> columns(schema.size());
  std::vector<std::shared_ptr<Dictionary>> dicts(schema.size());
  for (std::size_t j = 0; j < schema.size(); ++j) {
    if (schema.column(j).kind == ColumnKind::Categorical) dicts[j] = std::make_shared<Dictionary>();
  }

  std::size_t row = 0;
  while (detail::read_csv_record(in, fields, line_no)) {
    if (detail::blank_record(fields)) continue;
    for (std::size_t j = 0; j < schema.size(); ++j) {
      if (source[j] >= fields.size()) {
        fail(ErrorCode::MalformedCsv, "line " + std::to_string(line_no) + " has too few fields");
      }
      const std::string& cell = fields[source[j]];
      if (schema.column(j).kind == ColumnKind::Numeric) {
        auto v = detail::parse_double(cell);
        if (!v) {
          fail(ErrorCode::NumericParseError, "row " + std::to_string(row) + ", column '" +
                                                 schema.column(j).name + "': '" + cell + "'");
        }
        columns[j].numeric.push_back(*v);
      } else {
        columns[j].codes.push_back(dicts[j]->add(cell.empty() ? std::string(kMissingCategory) : cell));
      }
    }
    ++row;
  }
  for (std::size_t j = 0; j < schema.size(); ++j) columns[j].dictionary = dicts[j];

  const auto& target_dict = *dicts[schema.target_index()];
  if (row > 0 && target_dict.size() != 2) {
    fail(ErrorCode::InvalidTarget, "target '" + schema.target() + "' has " +
                                       std::to_string(target_dict.size()) + " categories, expected 2");
  }
  if (row == 0) {
    // No data rows: seed the target dictionary so the table is well formed.
    dicts[schema.target_index()]->add(schema.positive_label());
  }
  return Table(schema, std::move(columns));
}

inline Table load_csv(const std::string& path, const Schema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open '" + path + "'");
  return read_csv(in, schema);
}

inline void write_csv(std::ostream& out, const Table& table) {
  for (std::size_t j = 0; j < table.n_columns(); ++j) {
    if (j) out << ',';
    detail::write_csv_field(out, table.name(j));
  }
  out << '\n';
  for (std::size_t r = 0; r < table.n_rows(); ++r) {
    for (std::size_t j = 0; j < table.n_columns(); ++j) {
      if (j) out << ',';
      detail::write_csv_field(out, table.cell(r, j));
    }
    out << '\n';
  }
}

inline void save_csv(const std::string& path, const Table& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot write '" + path + "'");
  write_csv(out, table);
}

// ---------------------------------------------------------------------------
// Row-level operations

struct ClassCounts {
  std::size_t majority = 0;
  std::size_t minority = 0;

  std::size_t total() const { return majority + minority; }
  double minority_fraction() const {
    return total() == 0 ? 0.0 : static_cast<double>(minority) / static_cast<double>(total());
  }
};

inline ClassCounts class_counts(const Table& table) {
  ClassCounts counts;
  for (std::size_t r = 0; r < table.n_rows(); ++r) {
    if (table.is_positive(r)) ++counts.minority;
  }
  counts.majority = table.n_rows() - counts.minority;
  return counts;
}

struct NumericRange {
  double lo = 0.0;
  double hi = 0.0;
};

// A single conjunct: categorical equality or closed numeric interval.
struct Predicate {
  std::string column;
  std::variant<std::string, NumericRange> value;
};

// Parses "col=value" or "col=[lo,hi]". Several predicates may be joined
// with ';' or '&'.
inline std::vector<Predicate> parse_predicates(std::string_view text) {
  std::vector<Predicate> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find_first_of(";&", start);
    if (end == std::string_view::npos) end = text.size();
    auto part = detail::trim(text.substr(start, end - start));
    start = end + 1;
    if (part.empty()) continue;
    auto eq = part.find('=');
    if (eq == std::string_view::npos) fail(ErrorCode::InvalidArgument, "predicate '" + std::string(part) + "' lacks '='");
    Predicate p;
    p.column = std::string(detail::trim(part.substr(0, eq)));
    auto value = detail::trim(part.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '[' && value.back() == ']') {
      auto inner = value.substr(1, value.size() - 2);
      auto comma = inner.find(',');
      auto lo = comma == std::string_view::npos ? std::nullopt : detail::parse_double(inner.substr(0, comma));
      auto hi = comma == std::string_view::npos ? std::nullopt : detail::parse_double(inner.substr(comma + 1));
      if (!lo || !hi) fail(ErrorCode::InvalidArgument, "bad range '" + std::string(value) + "'");
      p.value = NumericRange{*lo, *hi};
    } else {
      p.value = std::string(value);
    }
    out.push_back(std::move(p));
  }
  return out;
}

inline std::vector<std::size_t> matching_rows(const Table& table, std::span<const Predicate> predicates) {
  struct Resolved {
    std::size_t column;
    bool categorical;
    std::int32_t code;
    NumericRange range;
  };
  std::vector<Resolved> resolved;
  for (const auto& p : predicates) {
    auto j = table.schema().find(p.column);
    if (!j) fail(ErrorCode::UnknownColumn, "no column '" + p.column + "'");
    Resolved r{*j, table.kind(*j) == ColumnKind::Categorical, 0, {}};
    if (r.categorical) {
      const auto* label = std::get_if<std::string>(&p.value);
      if (!label) fail(ErrorCode::InvalidArgument, "range predicate on categorical '" + p.column + "'");
      auto code = table.dictionary(*j).find(*label);
      if (!code) fail(ErrorCode::UnknownCategory, "'" + *label + "' not in column '" + p.column + "'");
      r.code = *code;
    } else if (const auto* range = std::get_if<NumericRange>(&p.value)) {
      r.range = *range;
    } else {
      auto v = detail::parse_double(std::get<std::string>(p.value));
      if (!v) fail(ErrorCode::InvalidArgument, "non-numeric value for numeric column '" + p.column + "'");
      r.range = {*v, *v};
    }
    resolved.push_back(r);
  }
  std::vector<std::size_t> rows;
  for (std::size_t row = 0; row < table.n_rows(); ++row) {
    bool keep = true;
    for (const auto& r : resolved) {
      if (r.categorical) {
        keep = table.codes(r.column)[row] == r.code;
      } else {
        const double v = table.numeric(r.column)[row];
        keep = v >= r.range.lo && v <= r.range.hi;
      }
      if (!keep) break;
    }
    if (keep) rows.push_back(row);
  }
  return rows;
}

inline Table filter_rows(const Table& table, std::span<const Predicate> predicates) {
  auto rows = matching_rows(table, predicates);
  return table.take(rows);
}

// Rows of `a` followed by rows of `b`. Dictionaries of `b` are merged into
// those of `a`; categories unknown to `a` are appended in `b`'s code order.
inline Table concat_tables(const Table& a, const Table& b) {
  if (!(a.schema() == b.schema())) fail(ErrorCode::SchemaMismatch, "schemas differ");
  std::vector<Column> cols(a.n_columns());
  for (std::size_t j = 0; j < a.n_columns(); ++j) {
    if (a.kind(j) == ColumnKind::Numeric) {
      cols[j].numeric.reserve(a.n_rows() + b.n_rows());
      cols[j].numeric.assign(a.numeric(j).begin(), a.numeric(j).end());
      cols[j].numeric.insert(cols[j].numeric.end(), b.numeric(j).begin(), b.numeric(j).end());
      continue;
    }
    cols[j].codes.reserve(a.n_rows() + b.n_rows());
    cols[j].codes.assign(a.codes(j).begin(), a.codes(j).end());
    const auto& da = a.dictionary_ptr(j);
    const auto& db = b.dictionary_ptr(j);
    if (da == db || *da == *db) {
      cols[j].dictionary = da;
      cols[j].codes.insert(cols[j].codes.end(), b.codes(j).begin(), b.codes(j).end());
      continue;
    }
    auto merged = std::make_shared<Dictionary>(*da);
    std::vector<std::int32_t> remap(db->size());
    for (std::size_t c = 0; c < db->size(); ++c) {
      remap[c] = merged->add(db->value(static_cast<std::int32_t>(c)));
    }
    for (auto c : b.codes(j)) cols[j].codes.push_back(remap[static_cast<std::size_t>(c)]);
    cols[j].dictionary = merged;
  }
  return Table(a.schema(), std::move(cols));
}

}  // namespace rebalance
