#include "aewb/data.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <set>
#include <sstream>

#include "aewb/errors.hpp"
#include "aewb/rng.hpp"

namespace aewb {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

bool parse_double(const std::string& s, double& out) {
  const std::string t = trim(s);
  if (t.empty()) return false;
  const char* begin = t.c_str();
  char* end = nullptr;
  out = std::strtod(begin, &end);
  return end == begin + t.size();
}

std::string format_double(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, p);
}

bool needs_quoting(const std::string& s, char delim) {
  return s.find_first_of(std::string("\"\n\r") + delim) != std::string::npos;
}

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

// One CSV record under RFC-4180 quoting; pos advances past the record and
// its terminator. line tracks the physical line where parsing stands.
std::vector<std::string> csv_record(const std::string& bytes, size_t& pos, int& line,
                                    char delim) {
  std::vector<std::string> fields;
  std::string cur;
  bool in_quotes = false;
  while (pos < bytes.size()) {
    const char c = bytes[pos];
    if (in_quotes) {
      if (c == '"') {
        if (pos + 1 < bytes.size() && bytes[pos + 1] == '"') {
          cur += '"';
          pos += 2;
        } else {
          in_quotes = false;
          ++pos;
        }
      } else {
        if (c == '\n') ++line;
        cur += c;
        ++pos;
      }
    } else if (c == '"' && cur.empty()) {
      in_quotes = true;
      ++pos;
    } else if (c == delim) {
      fields.push_back(cur);
      cur.clear();
      ++pos;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && pos + 1 < bytes.size() && bytes[pos + 1] == '\n') ++pos;
      ++pos;
      ++line;
      fields.push_back(cur);
      return fields;
    } else {
      cur += c;
      ++pos;
    }
  }
  fields.push_back(cur);
  return fields;
}

Dataset from_string_grid(const std::vector<std::vector<std::string>>& grid,
                         std::vector<std::string> names) {
  const int B = static_cast<int>(grid.size());
  const int n = static_cast<int>(names.size());
  Dataset ds;
  ds.columns.resize(static_cast<size_t>(n));
  for (int j = 0; j < n; ++j) ds.columns[static_cast<size_t>(j)].name = std::move(names[static_cast<size_t>(j)]);

  // A column is numeric when every non-missing cell parses as a real.
  std::vector<bool> numeric(static_cast<size_t>(n), true);
  for (int j = 0; j < n; ++j) {
    for (int b = 0; b < B && numeric[static_cast<size_t>(j)]; ++b) {
      const std::string cell = trim(grid[static_cast<size_t>(b)][static_cast<size_t>(j)]);
      if (cell.empty() || cell == "?") continue;
      double v;
      if (!parse_double(cell, v)) numeric[static_cast<size_t>(j)] = false;
    }
  }

  for (int j = 0; j < n; ++j) {
    Column& col = ds.columns[static_cast<size_t>(j)];
    if (numeric[static_cast<size_t>(j)]) {
      col.kind = ColKind::Numeric;
    } else {
      col.kind = ColKind::Nominal;
      std::set<std::string> cats;
      for (int b = 0; b < B; ++b) {
        const std::string cell = trim(grid[static_cast<size_t>(b)][static_cast<size_t>(j)]);
        if (!cell.empty() && cell != "?") cats.insert(cell);
      }
      col.categories.assign(cats.begin(), cats.end());
    }
  }

  ds.X = Tensor({B, n});
  for (int b = 0; b < B; ++b)
    for (int j = 0; j < n; ++j) {
      const std::string cell = trim(grid[static_cast<size_t>(b)][static_cast<size_t>(j)]);
      Column& col = ds.columns[static_cast<size_t>(j)];
      if (cell.empty() || cell == "?") {
        if (col.kind == ColKind::Nominal)
          throw ParseError("missing nominal value in column '" + col.name + "', row " +
                           std::to_string(b + 1));
        ds.X.at(b, j) = std::nan("");
      } else if (col.kind == ColKind::Numeric) {
        double v = 0;
        if (!parse_double(cell, v))
          throw ParseError("bad numeric value '" + cell + "' in column '" + col.name + "'");
        ds.X.at(b, j) = v;
      } else {
        const auto it = std::find(col.categories.begin(), col.categories.end(), cell);
        ds.X.at(b, j) = static_cast<double>(it - col.categories.begin());
      }
    }
  return ds;
}

}  // namespace

Tensor Dataset::train_matrix() const {
  const auto idx = train_rows();
  Tensor out({static_cast<int>(idx.size()), cols()});
  for (size_t r = 0; r < idx.size(); ++r)
    for (int j = 0; j < cols(); ++j) out.at(static_cast<int>(r), j) = X.at(idx[r], j);
  return out;
}

Tensor Dataset::test_matrix() const {
  const auto idx = test_rows();
  Tensor out({static_cast<int>(idx.size()), cols()});
  for (size_t r = 0; r < idx.size(); ++r)
    for (int j = 0; j < cols(); ++j) out.at(static_cast<int>(r), j) = X.at(idx[r], j);
  return out;
}

std::vector<int> Dataset::train_rows() const {
  std::vector<int> idx;
  for (int b = 0; b < rows(); ++b)
    if (is_train(b)) idx.push_back(b);
  return idx;
}

std::vector<int> Dataset::test_rows() const {
  std::vector<int> idx;
  for (int b = 0; b < rows(); ++b)
    if (!is_train(b)) idx.push_back(b);
  return idx;
}

Dataset parse_csv(const std::string& bytes, bool has_header, char delimiter) {
  if (trim(bytes).empty()) throw ParseError("empty csv input");
  size_t pos = 0;
  int line = 1;
  std::vector<std::vector<std::string>> records;
  std::vector<int> record_lines;
  while (pos < bytes.size()) {
    const int start_line = line;
    auto rec = csv_record(bytes, pos, line, delimiter);
    if (rec.size() == 1 && trim(rec[0]).empty()) continue;  // blank line
    records.push_back(std::move(rec));
    record_lines.push_back(start_line);
  }
  if (records.empty()) throw ParseError("empty csv input");

  const size_t width = records[0].size();
  for (size_t r = 0; r < records.size(); ++r)
    if (records[r].size() != width)
      throw ParseError("ragged csv row at line " + std::to_string(record_lines[r]) + ": expected " +
                       std::to_string(width) + " fields, got " + std::to_string(records[r].size()));

  std::vector<std::string> names;
  if (has_header) {
    for (auto& h : records[0]) names.push_back(trim(h));
    records.erase(records.begin());
    if (records.empty()) throw ParseError("csv has a header but no data rows");
  } else {
    for (size_t j = 0; j < width; ++j) names.push_back("c" + std::to_string(j));
  }
  return from_string_grid(records, std::move(names));
}

std::string write_csv(const Dataset& ds, char delimiter) {
  std::string out;
  for (int j = 0; j < ds.cols(); ++j) {
    if (j) out += delimiter;
    const std::string& name = ds.columns[static_cast<size_t>(j)].name;
    out += needs_quoting(name, delimiter) ? quoted(name) : name;
  }
  out += '\n';
  for (int b = 0; b < ds.rows(); ++b) {
    for (int j = 0; j < ds.cols(); ++j) {
      if (j) out += delimiter;
      const Column& col = ds.columns[static_cast<size_t>(j)];
      const double v = ds.X.at(b, j);
      if (std::isnan(v)) continue;  // missing -> empty field
      if (col.kind == ColKind::Numeric) {
        out += format_double(v);
      } else {
        const std::string& cat = col.categories[static_cast<size_t>(v)];
        out += needs_quoting(cat, delimiter) ? quoted(cat) : cat;
      }
    }
    out += '\n';
  }
  return out;
}

namespace {

// ARFF values may be quoted with ' or "; commas inside quotes are literal.
std::vector<std::string> split_arff_row(const std::string& row, int line) {
  std::vector<std::string> fields;
  std::string cur;
  char quote = 0;
  for (char c : row) {
    if (quote) {
      if (c == quote)
        quote = 0;
      else
        cur += c;
    } else if (c == '\'' || c == '"') {
      quote = c;
    } else if (c == ',') {
      fields.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quote) throw ParseError("unterminated quote in @data row at line " + std::to_string(line));
  fields.push_back(trim(cur));
  return fields;
}

std::string arff_unquote(const std::string& s) {
  if (s.size() >= 2 && ((s.front() == '\'' && s.back() == '\'') ||
                        (s.front() == '"' && s.back() == '"')))
    return s.substr(1, s.size() - 2);
  return s;
}

bool iequals_prefix(const std::string& s, const std::string& kw) {
  if (s.size() < kw.size()) return false;
  for (size_t i = 0; i < kw.size(); ++i)
    if (std::tolower(static_cast<unsigned char>(s[i])) != kw[i]) return false;
  return true;
}

}  // namespace

Dataset parse_arff(const std::string& bytes) {
  Dataset ds;
  std::istringstream in(bytes);
  std::string raw;
  int line = 0;
  bool in_data = false;
  std::vector<std::vector<std::string>> rows;
  std::vector<int> row_lines;

  while (std::getline(in, raw)) {
    ++line;
    const std::string s = trim(raw);
    if (s.empty() || s[0] == '%') continue;
    if (!in_data) {
      if (iequals_prefix(s, "@relation")) {
        ds.relation = arff_unquote(trim(s.substr(9)));
      } else if (iequals_prefix(s, "@attribute")) {
        const std::string rest = trim(s.substr(10));
        // name may be quoted; the type is everything after it
        size_t name_end;
        std::string name;
        if (!rest.empty() && (rest[0] == '\'' || rest[0] == '"')) {
          const char q = rest[0];
          name_end = rest.find(q, 1);
          if (name_end == std::string::npos)
            throw ParseError("unterminated attribute name at line " + std::to_string(line));
          name = rest.substr(1, name_end - 1);
          ++name_end;
        } else {
          name_end = rest.find_first_of(" \t");
          if (name_end == std::string::npos)
            throw ParseError("attribute without a type at line " + std::to_string(line));
          name = rest.substr(0, name_end);
        }
        const std::string type = trim(rest.substr(name_end));
        Column col;
        col.name = name;
        if (iequals_prefix(type, "numeric") || iequals_prefix(type, "real") ||
            iequals_prefix(type, "integer")) {
          col.kind = ColKind::Numeric;
        } else if (!type.empty() && type.front() == '{' && type.back() == '}') {
          col.kind = ColKind::Nominal;
          for (auto& v : split_arff_row(type.substr(1, type.size() - 2), line))
            col.categories.push_back(arff_unquote(v));
        } else {
          throw ParseError("unsupported attribute type '" + type + "' at line " +
                           std::to_string(line));
        }
        ds.columns.push_back(std::move(col));
      } else if (iequals_prefix(s, "@data")) {
        if (ds.columns.empty()) throw ParseError("@data before any @attribute");
        in_data = true;
      } else {
        throw ParseError("unrecognized header line " + std::to_string(line));
      }
    } else {
      rows.push_back(split_arff_row(s, line));
      row_lines.push_back(line);
    }
  }
  if (!in_data) throw ParseError("arff input has no @data section");

  const int n = ds.cols();
  const int B = static_cast<int>(rows.size());
  ds.X = Tensor({B, n});
  for (int b = 0; b < B; ++b) {
    const auto& row = rows[static_cast<size_t>(b)];
    if (static_cast<int>(row.size()) != n)
      throw ParseError("row arity mismatch at line " + std::to_string(row_lines[static_cast<size_t>(b)]) +
                       ": expected " + std::to_string(n) + " values, got " +
                       std::to_string(row.size()));
    for (int j = 0; j < n; ++j) {
      const std::string& cell = row[static_cast<size_t>(j)];
      Column& col = ds.columns[static_cast<size_t>(j)];
      if (cell == "?") {
        if (col.kind == ColKind::Nominal)
          throw ParseError("missing nominal value in column '" + col.name + "' at line " +
                           std::to_string(row_lines[static_cast<size_t>(b)]));
        ds.X.at(b, j) = std::nan("");
      } else if (col.kind == ColKind::Numeric) {
        double v;
        if (!parse_double(cell, v))
          throw ParseError("non-numeric value '" + cell + "' in column '" + col.name +
                           "' at line " + std::to_string(row_lines[static_cast<size_t>(b)]));
        ds.X.at(b, j) = v;
      } else {
        const auto it = std::find(col.categories.begin(), col.categories.end(), cell);
        if (it == col.categories.end())
          throw ParseError("undeclared category '" + cell + "' in column '" + col.name +
                           "' at line " + std::to_string(row_lines[static_cast<size_t>(b)]));
        ds.X.at(b, j) = static_cast<double>(it - col.categories.begin());
      }
    }
  }
  return ds;
}

std::string write_arff(const Dataset& ds) {
  std::string out = "@relation " + (ds.relation.empty() ? std::string("dataset") : ds.relation) + "\n";
  for (const auto& col : ds.columns) {
    out += "@attribute " + col.name + " ";
    if (col.kind == ColKind::Numeric) {
      out += "numeric";
    } else {
      out += "{";
      for (size_t i = 0; i < col.categories.size(); ++i) {
        if (i) out += ",";
        out += col.categories[i];
      }
      out += "}";
    }
    out += "\n";
  }
  out += "@data\n";
  for (int b = 0; b < ds.rows(); ++b) {
    for (int j = 0; j < ds.cols(); ++j) {
      if (j) out += ",";
      const Column& col = ds.columns[static_cast<size_t>(j)];
      const double v = ds.X.at(b, j);
      if (std::isnan(v))
        out += "?";
      else if (col.kind == ColKind::Numeric)
        out += format_double(v);
      else
        out += col.categories[static_cast<size_t>(v)];
    }
    out += "\n";
  }
  return out;
}

void impute_missing(Dataset& ds) {
  for (int j = 0; j < ds.cols(); ++j) {
    if (ds.columns[static_cast<size_t>(j)].kind != ColKind::Numeric) continue;
    double sum = 0;
    int count = 0;
    bool any_missing = false;
    for (int b = 0; b < ds.rows(); ++b) {
      const double v = ds.X.at(b, j);
      if (std::isnan(v)) {
        any_missing = true;
      } else if (ds.is_train(b)) {
        sum += v;
        ++count;
      }
    }
    if (!any_missing) continue;
    if (count == 0)
      throw ParseError("column '" + ds.columns[static_cast<size_t>(j)].name +
                       "' has no training values to impute from");
    const double mean = sum / count;
    for (int b = 0; b < ds.rows(); ++b)
      if (std::isnan(ds.X.at(b, j))) ds.X.at(b, j) = mean;
  }
}

Dataset dummy_encode(const Dataset& ds) {
  Dataset out;
  out.relation = ds.relation;
  out.split = ds.split;
  std::vector<std::pair<int, int>> mapping;  // (source col, category or -1)
  for (int j = 0; j < ds.cols(); ++j) {
    const Column& col = ds.columns[static_cast<size_t>(j)];
    if (col.kind == ColKind::Numeric) {
      out.columns.push_back(col);
      mapping.emplace_back(j, -1);
    } else {
      for (size_t c = 0; c < col.categories.size(); ++c) {
        Column ind;
        ind.name = col.name + "=" + col.categories[c];
        ind.kind = ColKind::Numeric;
        ind.source = col.name;
        out.columns.push_back(std::move(ind));
        mapping.emplace_back(j, static_cast<int>(c));
      }
    }
  }

  out.X = Tensor({ds.rows(), static_cast<int>(out.columns.size())});
  for (int b = 0; b < ds.rows(); ++b) {
    for (size_t t = 0; t < mapping.size(); ++t) {
      const auto [src, cat] = mapping[t];
      const double v = ds.X.at(b, src);
      if (cat < 0) {
        out.X.at(b, static_cast<int>(t)) = v;
      } else {
        const Column& col = ds.columns[static_cast<size_t>(src)];
        const int idx = static_cast<int>(v);
        if (std::isnan(v) || idx < 0 || idx >= static_cast<int>(col.categories.size()))
          throw ParseError("unknown category index " + std::to_string(v) + " in column '" +
                           col.name + "'");
        out.X.at(b, static_cast<int>(t)) = idx == cat ? 1.0 : 0.0;
      }
    }
  }
  return out;
}

void minmax_scale(Dataset& ds) {
  for (const auto& col : ds.columns)
    if (col.kind == ColKind::Nominal)
      throw ContractError("minmax_scale needs dummy-encoded data; column '" + col.name +
                          "' is nominal");
  const int n = ds.cols();
  ds.scale_min.assign(static_cast<size_t>(n), 0.0);
  ds.scale_max.assign(static_cast<size_t>(n), 0.0);
  for (int j = 0; j < n; ++j) {
    bool first = true;
    double lo = 0, hi = 0;
    for (int b = 0; b < ds.rows(); ++b) {
      if (!ds.is_train(b)) continue;
      const double v = ds.X.at(b, j);
      if (std::isnan(v)) throw ContractError("minmax_scale found missing values; impute first");
      if (first) {
        lo = hi = v;
        first = false;
      } else {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
    ds.scale_min[static_cast<size_t>(j)] = lo;
    ds.scale_max[static_cast<size_t>(j)] = hi;
    for (int b = 0; b < ds.rows(); ++b) {
      double& v = ds.X.at(b, j);
      if (hi == lo) {
        v = 0.0;
      } else {
        v = (v - lo) / (hi - lo);
        if (!ds.is_train(b)) v = std::min(std::max(v, 0.0), 1.0);
      }
    }
  }
  ds.scaled = true;
}

double unscale_cell(const Dataset& ds, int col, double v) {
  if (!ds.scaled) throw ContractError("unscale_cell on unscaled dataset");
  const double lo = ds.scale_min[static_cast<size_t>(col)];
  const double hi = ds.scale_max[static_cast<size_t>(col)];
  return hi == lo ? lo : lo + v * (hi - lo);
}

void split_dataset(Dataset& ds, double test_fraction, uint64_t seed) {
  if (test_fraction < 0 || test_fraction > 1)
    throw ContractError("test_fraction must lie in [0,1]");
  const int B = ds.rows();
  std::vector<int> order(static_cast<size_t>(B));
  for (int i = 0; i < B; ++i) order[static_cast<size_t>(i)] = i;
  Rng rng(seed);
  rng.shuffle(order);
  const int n_test = static_cast<int>(std::llround(test_fraction * B));
  ds.split.assign(static_cast<size_t>(B), 0);
  for (int i = 0; i < n_test; ++i) ds.split[static_cast<size_t>(order[static_cast<size_t>(i)])] = 1;
}

int find_column(const Dataset& ds, const std::string& name) {
  for (int j = 0; j < ds.cols(); ++j)
    if (ds.columns[static_cast<size_t>(j)].name == name) return j;
  return -1;
}

std::vector<double> extract_target(Dataset& ds, const std::string& column_name) {
  const int j = find_column(ds, column_name);
  if (j < 0) throw ContractError("target column '" + column_name + "' not found");
  std::vector<double> target(static_cast<size_t>(ds.rows()));
  for (int b = 0; b < ds.rows(); ++b) target[static_cast<size_t>(b)] = ds.X.at(b, j);

  const int n = ds.cols();
  Tensor nx({ds.rows(), n - 1});
  for (int b = 0; b < ds.rows(); ++b) {
    int w = 0;
    for (int c = 0; c < n; ++c) {
      if (c == j) continue;
      nx.at(b, w++) = ds.X.at(b, c);
    }
  }
  ds.X = std::move(nx);
  ds.columns.erase(ds.columns.begin() + j);
  if (ds.scaled) {
    ds.scale_min.erase(ds.scale_min.begin() + j);
    ds.scale_max.erase(ds.scale_max.begin() + j);
  }
  return target;
}

}  // namespace aewb
