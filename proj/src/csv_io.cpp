#include "hazardforge/csv_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <vector>

#include "hazardforge/errors.hpp"

namespace hazardforge {
namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line;  // source line of each row
};

Table read_table(std::istream& in) {
  Table t;
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    if (lineno == 1 && raw.size() >= 3 && raw.compare(0, 3, "\xEF\xBB\xBF") == 0) raw.erase(0, 3);
    if (trim(raw).empty()) continue;
    auto fields = split(raw);
    if (t.header.empty()) {
      t.header = std::move(fields);
      continue;
    }
    if (fields.size() != t.header.size()) {
      throw ParseError("expected " + std::to_string(t.header.size()) + " fields, found " +
                           std::to_string(fields.size()),
                       lineno);
    }
    t.rows.push_back(std::move(fields));
    t.line.push_back(lineno);
  }
  if (t.header.empty()) throw ParseError("missing header", lineno == 0 ? 1 : lineno);
  return t;
}

double parse_real(const std::string& s, std::size_t line, bool allow_inf = false) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "inf" || lower == "+inf") {
    if (allow_inf) return kInf;
    throw ParseError("infinite value not allowed here", line);
  }
  double x = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty() || !std::isfinite(x)) {
    throw ParseError("not a number: '" + s + "'", line);
  }
  return x;
}

int parse_int(const std::string& s, std::size_t line) {
  int x = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw ParseError("not an integer: '" + s + "'", line);
  }
  return x;
}

void expect_prefix(const Table& t, std::initializer_list<const char*> names) {
  std::size_t k = 0;
  for (const char* name : names) {
    if (k >= t.header.size() || t.header[k] != name) {
      std::string expected;
      for (const char* n : names) expected += (expected.empty() ? "" : ",") + std::string(n);
      throw ParseError("header must start with " + expected, 1);
    }
    ++k;
  }
}

}  // namespace

std::string format_double(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  (void)ec;
  return std::string(buf, ptr);
}

RightCensoredSample read_right_censored(std::istream& in, const RightCensoredColumns& cols) {
  const auto t = read_table(in);
  expect_prefix(t, {"time", "status"});
  std::optional<std::size_t> group_col;
  std::optional<std::size_t> strata_col;
  std::optional<std::size_t> cause_col;
  std::vector<std::size_t> cov_cols;
  for (std::size_t c = 2; c < t.header.size(); ++c) {
    const auto& name = t.header[c];
    if (!cols.group.empty() && name == cols.group) {
      group_col = c;
    } else if (!cols.strata.empty() && name == cols.strata) {
      strata_col = c;
    } else if (!cols.cause.empty() && name == cols.cause) {
      cause_col = c;
    } else {
      cov_cols.push_back(c);
    }
  }
  if (!cols.strata.empty() && !strata_col) {
    throw ParseError("strata column '" + cols.strata + "' not found", 1);
  }
  if (!cols.cause.empty() && !cause_col) {
    throw ParseError("cause column '" + cols.cause + "' not found", 1);
  }
  const auto n = static_cast<Eigen::Index>(t.rows.size());
  if (n == 0) throw ValidationError("sample must contain at least one record");
  Eigen::VectorXd time(n);
  Eigen::VectorXi status(n);
  Eigen::MatrixXd z(n, static_cast<Eigen::Index>(cov_cols.size()));
  std::vector<int> group;
  std::vector<int> strata;
  std::vector<int> cause;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = t.rows[static_cast<std::size_t>(i)];
    const auto line = t.line[static_cast<std::size_t>(i)];
    time[i] = parse_real(row[0], line);
    status[i] = parse_int(row[1], line);
    if (status[i] != 0 && status[i] != 1) throw ParseError("status must be 0 or 1", line);
    if (time[i] < 0.0) throw ParseError("time must be nonnegative", line);
    for (std::size_t c = 0; c < cov_cols.size(); ++c) {
      z(i, static_cast<Eigen::Index>(c)) = parse_real(row[cov_cols[c]], line);
    }
    if (group_col) group.push_back(parse_int(row[*group_col], line));
    if (strata_col) strata.push_back(parse_int(row[*strata_col], line));
    if (cause_col) {
      const int label = parse_int(row[*cause_col], line);
      if (status[i] == 1 && label < 1) throw ParseError("event without a cause label", line);
      cause.push_back(label);
    }
  }
  return RightCensoredSample(std::move(time), std::move(status), std::move(z), std::move(group),
                             std::move(strata), std::move(cause));
}

IntervalCensoredSample read_interval(std::istream& in) {
  const auto t = read_table(in);
  expect_prefix(t, {"left", "right"});
  std::vector<double> left;
  std::vector<double> right;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const double l = parse_real(t.rows[i][0], t.line[i]);
    const double r = parse_real(t.rows[i][1], t.line[i], true);
    if (l < 0.0) throw ParseError("left endpoint must be nonnegative", t.line[i]);
    if (l > r) throw ParseError("left endpoint exceeds right endpoint", t.line[i]);
    left.push_back(l);
    right.push_back(r);
  }
  return IntervalCensoredSample(std::move(left), std::move(right));
}

MultiStateHistory read_multistate(std::istream& in, std::optional<int> states) {
  const auto t = read_table(in);
  expect_prefix(t, {"id", "time", "from", "to"});
  struct Row {
    double time;
    int from;
    int to;
    std::size_t line;
  };
  std::vector<std::string> order;
  std::map<std::string, std::vector<Row>> by_id;
  int max_state = 0;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    Row r{parse_real(row[1], t.line[i], true), parse_int(row[2], t.line[i]),
          parse_int(row[3], t.line[i]), t.line[i]};
    if (r.from < 0 || r.to < -1) throw ParseError("state labels must be nonnegative", r.line);
    if (std::isinf(r.time) && r.to != -1) throw ParseError("transition time must be finite", r.line);
    max_state = std::max({max_state, r.from, r.to});
    auto [it, inserted] = by_id.try_emplace(row[0]);
    if (inserted) order.push_back(row[0]);
    it->second.push_back(r);
  }
  const int k = states.value_or(max_state + 1);
  std::vector<SubjectPath> subjects;
  for (const auto& id : order) {
    auto rows = by_id[id];
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
      // at equal times a transition precedes the censoring row
      return a.time < b.time || (a.time == b.time && a.to != -1 && b.to == -1);
    });
    SubjectPath path;
    path.initial_state = rows.front().from;
    for (const auto& r : rows) {
      if (path.censor_time) throw ParseError("row after censoring for id " + id, r.line);
      if (r.to == -1) {
        // `inf` marks a subject followed without censoring
        if (std::isinf(r.time)) break;
        path.censor_time = r.time;
      } else {
        path.transitions.push_back({r.time, r.from, r.to});
      }
    }
    subjects.push_back(std::move(path));
  }
  return MultiStateHistory(k, std::move(subjects));
}

BivariateSample read_bivariate(std::istream& in) {
  const auto t = read_table(in);
  expect_prefix(t, {"t1", "d1", "t2", "d2"});
  std::vector<double> t1;
  std::vector<double> t2;
  std::vector<int> d1;
  std::vector<int> d2;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    t1.push_back(parse_real(t.rows[i][0], t.line[i]));
    d1.push_back(parse_int(t.rows[i][1], t.line[i]));
    t2.push_back(parse_real(t.rows[i][2], t.line[i]));
    d2.push_back(parse_int(t.rows[i][3], t.line[i]));
  }
  return BivariateSample(std::move(t1), std::move(t2), std::move(d1), std::move(d2));
}

AnySample read_csv(const std::filesystem::path& path, CsvSchema schema,
                   const RightCensoredColumns& cols) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  switch (schema) {
    case CsvSchema::right_censored:
      return read_right_censored(in, cols);
    case CsvSchema::interval:
      return read_interval(in);
    case CsvSchema::multistate:
      return read_multistate(in);
    case CsvSchema::bivariate:
      return read_bivariate(in);
  }
  throw DomainError("unknown CSV schema");
}

void write_right_censored(std::ostream& out, const RightCensoredSample& sample) {
  out << "time,status";
  if (sample.has_groups()) out << ",group";
  if (sample.has_strata()) out << ",stratum";
  if (sample.has_causes()) out << ",cause";
  for (Eigen::Index j = 0; j < sample.dim(); ++j) out << ",z" << (j + 1);
  out << '\n';
  for (std::size_t i = 0; i < sample.size(); ++i) {
    out << format_double(sample.time(i)) << ',' << (sample.event(i) ? 1 : 0);
    if (sample.has_groups()) out << ',' << sample.groups()[i];
    if (sample.has_strata()) out << ',' << sample.strata()[i];
    if (sample.has_causes()) out << ',' << sample.causes()[i];
    for (Eigen::Index j = 0; j < sample.dim(); ++j) {
      out << ',' << format_double(sample.covariates()(static_cast<Eigen::Index>(i), j));
    }
    out << '\n';
  }
}

void write_interval(std::ostream& out, const IntervalCensoredSample& sample) {
  out << "left,right\n";
  for (std::size_t i = 0; i < sample.size(); ++i) {
    out << format_double(sample.left()[i]) << ',' << format_double(sample.right()[i]) << '\n';
  }
}

void write_multistate(std::ostream& out, const MultiStateHistory& history) {
  out << "id,time,from,to\n";
  for (std::size_t s = 0; s < history.size(); ++s) {
    const auto& path = history.subjects()[s];
    int state = path.initial_state;
    for (const auto& tr : path.transitions) {
      out << (s + 1) << ',' << format_double(tr.time) << ',' << tr.from << ',' << tr.to << '\n';
      state = tr.to;
    }
    if (path.censor_time) {
      out << (s + 1) << ',' << format_double(*path.censor_time) << ',' << state << ",-1\n";
    } else if (path.transitions.empty()) {
      // a subject never observed to move still needs a row to exist
      out << (s + 1) << ",inf," << state << ",-1\n";
    }
  }
}

}  // namespace hazardforge
