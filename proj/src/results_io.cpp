#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "fgbench/config.hpp"
#include "fgbench/harness.hpp"

namespace fgbench {

namespace fs = std::filesystem;

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// Keeps file names portable: anything outside [A-Za-z0-9._-] becomes '_'.
std::string sanitize(const std::string& s) {
  std::string out = s;
  for (char& c : out) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '.' || c == '-' || c == '_';
    if (!ok) c = '_';
  }
  return out;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

std::vector<std::size_t> recorded_rounds(std::size_t T, std::size_t every) {
  std::vector<std::size_t> rounds;
  for (std::size_t t = every; t <= T; t += every) rounds.push_back(t);
  if (T > 0 && (rounds.empty() || rounds.back() != T)) rounds.push_back(T);
  return rounds;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) out.push_back(field);
  return out;
}

double to_double(const std::string& s, const fs::path& path, std::size_t line) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    throw std::runtime_error(path.string() + ":" + std::to_string(line) + ": bad number '" + s + "'");
  }
}

}  // namespace

std::string result_stem(const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << sanitize(env_name(cfg.env)) << "__" << sanitize(policy_display_name(cfg.policy)) << "__"
     << std::hex << std::setw(16) << std::setfill('0') << config_hash(cfg);
  return os.str();
}

OutputFiles write_results(const AggregateResult& result, const std::vector<RegretTrace>& traces,
                          const ExperimentConfig& cfg) {
  const fs::path dir(cfg.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + dir.string() + "': " + ec.message());

  const std::string stem = result_stem(cfg);
  OutputFiles files;
  for (const auto& tr : traces) {
    const fs::path path = dir / (stem + "__seed" + std::to_string(tr.seed) + ".csv");
    auto out = open_out(path);
    out << "round,instant_regret,cumulative_regret\n";
    double cum = 0.0;
    std::size_t next = 0;
    const auto rounds = recorded_rounds(tr.horizon(), cfg.record_every);
    for (std::size_t t = 1; t <= tr.horizon(); ++t) {
      cum += tr.instant[t - 1];
      if (next < rounds.size() && rounds[next] == t) {
        out << t << ',' << fmt(tr.instant[t - 1]) << ',' << fmt(cum) << '\n';
        ++next;
      }
    }
    finish(out, path);
    files.traces.push_back(path);
  }

  files.summary = dir / (stem + "__summary.csv");
  {
    auto out = open_out(files.summary);
    out << "env,policy,seeds,mean_final,std_final,mean_simple,std_simple\n";
    out << result.env << ',' << result.policy << ',' << result.seeds << ',' << fmt(result.mean_final)
        << ',' << fmt(result.std_final) << ',' << fmt(result.mean_simple) << ','
        << fmt(result.std_simple) << '\n';
    finish(out, files.summary);
  }

  files.plot = dir / (stem + "__plot.csv");
  {
    auto out = open_out(files.plot);
    out << "round,mean,lo,hi\n";
    for (std::size_t t : recorded_rounds(result.mean_curve.size(), cfg.record_every)) {
      const double m = result.mean_curve[t - 1];
      const double s = result.std_curve[t - 1];
      out << t << ',' << fmt(m) << ',' << fmt(m - s) << ',' << fmt(m + s) << '\n';
    }
    finish(out, files.plot);
  }
  return files;
}

RegretTrace read_trace_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || line != "round,instant_regret,cumulative_regret") {
    throw std::runtime_error(path.string() + ": not a trace file");
  }
  RegretTrace tr;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 3) throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": expected 3 fields");
    const auto round = static_cast<std::size_t>(to_double(f[0], path, line_no));
    if (round != tr.instant.size() + 1) {
      throw std::runtime_error(path.string() + ": rounds are thinned or out of order; need record_every = 1");
    }
    tr.instant.push_back(to_double(f[1], path, line_no));
  }
  return tr;
}

std::vector<SummaryRow> read_summary_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || line != "env,policy,seeds,mean_final,std_final,mean_simple,std_simple") {
    throw std::runtime_error(path.string() + ": not a summary file");
  }
  std::vector<SummaryRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 7) throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": expected 7 fields");
    SummaryRow r;
    r.env = f[0];
    r.policy = f[1];
    r.seeds = static_cast<std::size_t>(to_double(f[2], path, line_no));
    r.mean_final = to_double(f[3], path, line_no);
    r.std_final = to_double(f[4], path, line_no);
    r.mean_simple = to_double(f[5], path, line_no);
    r.std_simple = to_double(f[6], path, line_no);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<SummaryRow> collect_summaries(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw std::runtime_error("'" + dir.string() + "' is not a directory");
  std::vector<SummaryRow> rows;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_regular_file() && name.size() > 12 && name.ends_with("__summary.csv")) {
      auto more = read_summary_csv(entry.path());
      rows.insert(rows.end(), more.begin(), more.end());
    }
  }
  std::sort(rows.begin(), rows.end(), [](const SummaryRow& a, const SummaryRow& b) {
    return std::tie(a.env, a.policy, a.seeds) < std::tie(b.env, b.policy, b.seeds);
  });
  return rows;
}

}  // namespace fgbench
