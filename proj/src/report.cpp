#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>

#include "coapids/error.hpp"
#include "coapids/eval.hpp"

namespace coapids::eval {

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::vector<std::size_t> dims_in_order(const SweepReport& r) {
  std::vector<std::size_t> dims;
  for (const auto& row : r.rows) {
    if (std::find(dims.begin(), dims.end(), row.dim) == dims.end()) dims.push_back(row.dim);
  }
  return dims;
}

std::vector<Learner> learners_in_order(const SweepReport& r) {
  std::vector<Learner> out;
  for (const auto& row : r.rows) {
    if (std::find(out.begin(), out.end(), row.classifier) == out.end()) out.push_back(row.classifier);
  }
  return out;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.insert(0, width - s.size(), ' ');
  return s;
}

}  // namespace

std::string report_csv(const SweepReport& report) {
  std::string out = "dim,classifier,precision,recall,f1,highlighted\n";
  for (const auto& r : report.rows) {
    out += std::to_string(r.dim) + ',' + std::string(learner_display(r.classifier)) + ',' + fixed(r.precision, 6) +
           ',' + fixed(r.recall, 6) + ',' + fixed(r.f1, 6) + ',' + (r.highlighted ? "1" : "0") + '\n';
  }
  return out;
}

SweepReport parse_report_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  const ingest::DatasetTable t = ingest::parse_csv(in);
  const std::vector<std::string> expected{"dim", "classifier", "precision", "recall", "f1", "highlighted"};
  if (t.columns != expected) throw Error(Errc::malformed_csv, "not a sweep report header");
  SweepReport report;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    auto num = [&](std::size_t c) {
      const auto v = row[c] ? ingest::parse_number(*row[c]) : std::nullopt;
      if (!v) throw Error(Errc::malformed_csv, "report row " + std::to_string(i + 1) + ": bad '" + expected[c] + "'");
      return *v;
    };
    SweepRow r;
    r.dim = static_cast<std::size_t>(num(0));
    if (!row[1]) throw Error(Errc::malformed_csv, "report row " + std::to_string(i + 1) + ": missing classifier");
    r.classifier = parse_learner(*row[1]);
    r.precision = num(2);
    r.recall = num(3);
    r.f1 = num(4);
    r.highlighted = num(5) != 0.0;
    report.rows.push_back(r);
  }
  return report;
}

std::string report_table(const SweepReport& report) {
  const auto dims = dims_in_order(report);
  const auto learners = learners_in_order(report);
  std::map<std::pair<std::size_t, Learner>, const SweepRow*> cell;
  for (const auto& r : report.rows) cell[{r.dim, r.classifier}] = &r;

  constexpr std::size_t kCell = 8;
  constexpr std::size_t kFirst = 8;
  const std::size_t group = learners.size() * kCell;
  std::string out = std::string(kFirst, ' ');
  for (const char* name : {"PRECISION", "RECALL", "F-SCORE"}) out += " |" + pad(name, group);
  out += '\n' + pad("Features", kFirst);
  for (int m = 0; m < 3; ++m) {
    out += " |";
    for (Learner l : learners) out += pad(std::string(learner_display(l)), kCell);
  }
  out += '\n' + std::string(kFirst + 3 * (group + 2), '-') + '\n';
  for (std::size_t dim : dims) {
    out += pad(std::to_string(dim), kFirst);
    for (int m = 0; m < 3; ++m) {
      out += " |";
      for (Learner l : learners) {
        const auto it = cell.find({dim, l});
        if (it == cell.end()) {
          out += pad("-", kCell);
          continue;
        }
        const SweepRow& r = *it->second;
        const double v = m == 0 ? r.precision : m == 1 ? r.recall : r.f1;
        out += pad(fixed(v, 4) + (v >= kHighlightThreshold ? "*" : " "), kCell);
      }
    }
    out += '\n';
  }
  out += "* value >= " + fixed(kHighlightThreshold, 2) + "; scores on the held-out test split\n";
  return out;
}

std::string report_means_csv(const SweepReport& report) {
  std::string out = "dim,precision,recall,f1\n";
  for (std::size_t dim : dims_in_order(report)) {
    double p = 0.0, r = 0.0, f = 0.0;
    std::size_t n = 0;
    for (const auto& row : report.rows) {
      if (row.dim != dim) continue;
      p += row.precision;
      r += row.recall;
      f += row.f1;
      ++n;
    }
    const double scale = 1.0 / static_cast<double>(n);
    out += std::to_string(dim) + ',' + fixed(p * scale, 6) + ',' + fixed(r * scale, 6) + ',' + fixed(f * scale, 6) + '\n';
  }
  return out;
}

}  // namespace coapids::eval
