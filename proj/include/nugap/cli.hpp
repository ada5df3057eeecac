#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nugap/io.hpp"
#include "nugap/metrics.hpp"
#include "nugap/toeplitz.hpp"

namespace nugap::cli {

enum Exit : int { kOk = 0, kUsage = 2, kUncertain = 3, kInternal = 4 };

struct RunConfig {
  double tol = 1e-6;
  double ymax_hint = 0.0;
  int grid = 2048;
  int fir = 64;
  std::string output = "text";
  std::uint64_t seed = 1;
  bool timing = false;
  std::string trace;

  MetricConfig metric() const {
    MetricConfig m;
    m.grid.tol = tol;
    m.grid.ymax_hint = ymax_hint;
    m.fir_order = fir;
    m.circle_grid = grid;
    return m;
  }
};

inline int exit_code(ErrorCode c) { return is_certification_failure(c) ? kUncertain : kUsage; }

inline io::Json index_json(const std::optional<IndexPair>& w) {
  if (!w) return nullptr;
  return io::Json::array({io::num9(w->ap_motion), w->rel_wind});
}

inline std::string index_text(const IndexPair& w) {
  return "(" + io::fmt(w.ap_motion == 0.0 ? 0.0 : w.ap_motion) + ", " + std::to_string(w.rel_wind) + ")";
}

// --------------------------------------------------------------------------
// subcommands; each returns an exit code and writes its document to `out`

inline int cmd_nu(const std::vector<PlantDesc>& p, const RunConfig& rc, std::ostream& out) {
  const NuResult r = nu_metric(p[0], p[1], rc.metric());
  if (rc.output == "json") {
    io::Json j{{"d_nu", io::num9(r.value)},
               {"branch", std::string(to_string(r.branch))},
               {"norm_sup", io::num9(r.norm_sup)},
               {"argmax", io::num9(r.argmax)},
               {"index", index_json(r.index)}};
    out << j.dump() << "\n";
  } else if (rc.output == "csv") {
    out << "d_nu,branch,norm_sup,argmax\n"
        << io::fmt(r.value) << "," << to_string(r.branch) << "," << io::fmt(r.norm_sup) << "," << io::fmt(r.argmax) << "\n";
  } else {
    out << "d_nu = " << io::fmt(r.value) << " (" << to_string(r.branch) << ")\n"
        << "sup |G2~ G1| = " << io::fmt(r.norm_sup) << " at y = " << io::fmt(r.argmax) << "\n";
    if (r.index) out << "W(G1* G2) = " << index_text(*r.index) << "\n";
  }
  return kOk;
}

inline int cmd_gap(const std::vector<PlantDesc>& p, const RunConfig& rc, std::ostream& out) {
  const GapBracket g = gap_bracket(p[0], p[1], rc.metric());
  if (rc.output == "json") {
    io::Json j{{"lower", io::num9(g.lower)}, {"upper", io::num9(g.upper)}, {"fir_order", g.fir_order}, {"circle_grid", g.circle_grid}};
    out << j.dump() << "\n";
  } else if (rc.output == "csv") {
    out << "lower,upper,fir_order,circle_grid\n"
        << io::fmt(g.lower) << "," << io::fmt(g.upper) << "," << g.fir_order << "," << g.circle_grid << "\n";
  } else {
    out << "gap in [" << io::fmt(g.lower) << ", " << io::fmt(g.upper) << "] (L = " << g.fir_order << ", N = " << g.circle_grid << ")\n";
  }
  return kOk;
}

inline int cmd_margin(const std::vector<PlantDesc>& p, const RunConfig& rc, std::ostream& out) {
  const MarginReport m = stability_margin(p[0], p[1], rc.metric());
  if (rc.output == "json") {
    io::Json j{{"stabilized", m.stabilized}, {"mu", io::num9(m.mu)}, {"delta_index", index_json(m.delta_index)}};
    out << j.dump() << "\n";
  } else if (rc.output == "csv") {
    out << "stabilized,mu\n" << (m.stabilized ? "true" : "false") << "," << io::fmt(m.mu) << "\n";
  } else {
    out << (m.stabilized ? "stabilized" : "not stabilized") << ", mu = " << io::fmt(m.mu) << "\n";
    if (m.delta_index) out << "W(delta) = " << index_text(*m.delta_index) << "\n";
  }
  return kOk;
}

inline int cmd_certify(const std::vector<PlantDesc>& p, const RunConfig& rc, std::ostream& out) {
  const RobustnessReport r = certify_robustness(p[0], p[1], p[2], rc.metric());
  if (rc.output == "json") {
    io::Json j{{"mu_p", io::num9(r.mu_p)},   {"mu_pprime", io::num9(r.mu_pprime)},
               {"d_nu", io::num9(r.d_nu)},   {"branch", std::string(to_string(r.branch))},
               {"rhs", io::num9(r.rhs)},     {"slack", io::num9(r.slack)},
               {"holds", r.holds},           {"vacuous", r.vacuous}};
    out << j.dump() << "\n";
  } else if (rc.output == "csv") {
    out << "mu_p,mu_pprime,d_nu,slack,holds,vacuous\n"
        << io::fmt(r.mu_p) << "," << io::fmt(r.mu_pprime) << "," << io::fmt(r.d_nu) << "," << io::fmt(r.slack) << ","
        << (r.holds ? "true" : "false") << "," << (r.vacuous ? "true" : "false") << "\n";
  } else {
    out << "mu(p, c) = " << io::fmt(r.mu_p) << ", mu(p', c) = " << io::fmt(r.mu_pprime) << ", d_nu = " << io::fmt(r.d_nu) << "\n"
        << (r.vacuous ? "VACUOUS" : (r.holds ? "HOLDS" : "VIOLATED")) << " (slack " << io::fmt(r.slack) << ")\n";
  }
  return r.holds ? kOk : kUncertain;
}

inline int cmd_index(const LineElement& e, const RunConfig& rc, std::ostream& out) {
  IndexConfig ic = rc.metric().index();
  const double mm = ap_mean_motion(e.atoms(), ic);
  WindingTrace trace;
  const long n = relative_winding(e, ic, rc.trace.empty() ? nullptr : &trace);
  const IndexPair w{mm, n};
  if (!rc.trace.empty()) {
    std::ofstream f(rc.trace);
    if (!f) throw Error(ErrorCode::InvalidArgument, "cannot write " + rc.trace);
    f << "y,phase,modulus\n";
    for (const WindingSample& s : trace.samples) f << io::fmt(s.y) << "," << io::fmt(s.phase) << "," << io::fmt(s.modulus) << "\n";
  }
  if (rc.output == "json")
    out << io::Json{{"ap_motion", io::num9(w.ap_motion == 0.0 ? 0.0 : w.ap_motion)}, {"rel_wind", w.rel_wind}}.dump() << "\n";
  else if (rc.output == "csv")
    out << "ap_motion,rel_wind\n" << io::fmt(w.ap_motion == 0.0 ? 0.0 : w.ap_motion) << "," << w.rel_wind << "\n";
  else
    out << index_text(w) << "\n";
  return kOk;
}

inline int cmd_toeplitz(const LineElement& e, const RunConfig& rc, std::ostream& out) {
  const ToeplitzReport rep = invertibility_diagnostic(e, {64, 128, 256, 512}, rc.metric().index());
  if (rc.output == "json") {
    io::Json rows = io::Json::array();
    for (const SectionRow& r : rep.rows)
      rows.push_back({{"order", r.order}, {"sigma_min", io::num9(r.sigma_min)}, {"small_count", r.small_count}});
    out << io::Json{{"winding", rep.winding}, {"verdict", rep.verdict}, {"grid", rep.grid}, {"rows", rows}}.dump() << "\n";
  } else if (rc.output == "csv") {
    out << "order,sigma_min,small_count\n";
    for (const SectionRow& r : rep.rows) out << r.order << "," << io::fmt(r.sigma_min) << "," << r.small_count << "\n";
  } else {
    out << rep.verdict << " (winding " << rep.winding << ")\n";
    for (const SectionRow& r : rep.rows)
      out << "  order " << r.order << ": sigma_min " << io::fmt(r.sigma_min) << ", small " << r.small_count << "\n";
  }
  return kOk;
}

// --------------------------------------------------------------------------
// sweep

struct SweepRow {
  std::string id1, id2;
  double d_nu = 0.0;
  std::string branch;
  double gap_lo = 0.0, gap_hi = 0.0, mu_best = 0.0;
  bool sandwich_ok = false;
  bool failed = false;
  double violation = 0.0;
  long ms = 0;
};

inline constexpr double kSandwichUpperTol = 1e-4;
inline constexpr double kSandwichLowerTol = 1e-3;

struct Corpus {
  std::vector<PlantDesc> plants;
  std::vector<PlantDesc> controllers;
};

inline Corpus parse_corpus(const std::string& text) {
  const io::Json j = io::parse_json(text);
  Corpus c;
  const io::Json* plants = &j;
  if (j.is_object()) {
    if (!j.contains("plants")) throw Error(ErrorCode::Parse, "corpus object needs a plants array");
    plants = &j["plants"];
    if (j.contains("controllers")) {
      if (!j["controllers"].is_array()) throw Error(ErrorCode::Parse, "controllers must be an array");
      for (const io::Json& x : j["controllers"]) c.controllers.push_back(io::plant_from_json(x));
    }
  }
  if (!plants->is_array()) throw Error(ErrorCode::Parse, "corpus must be an array of plants");
  for (const io::Json& x : *plants) c.plants.push_back(io::plant_from_json(x));
  return c;
}

inline unsigned worker_count() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("NUGAP_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
  }
  return n;
}

/// Runs job(i) for i in [0, n) on a bounded pool.
template <typename Job>
void parallel_for(std::size_t n, Job&& job) {
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(worker_count(), std::max<std::size_t>(n, 1)));
  std::atomic<std::size_t> next{0};
  auto loop = [&] {
    for (std::size_t i = next++; i < n; i = next++) job(i);
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < workers; ++t) pool.emplace_back(loop);
  loop();
  for (std::thread& t : pool) t.join();
}

inline std::vector<SweepRow> run_sweep(const Corpus& corpus, const RunConfig& rc) {
  const MetricConfig mc = rc.metric();
  const std::size_t n = corpus.plants.size();
  auto id = [&](std::size_t i) { return corpus.plants[i].name.empty() ? std::to_string(i) : corpus.plants[i].name; };
  const std::vector<PlantDesc> cands = corpus.controllers.empty() ? controller_candidates(rc.seed) : corpus.controllers;

  std::vector<double> mu(n, 0.0);
  std::vector<std::string> mu_err(n);
  parallel_for(n > 1 ? n : 0, [&](std::size_t i) {
    try {
      mu[i] = mu_opt_lower(corpus.plants[i], cands, mc).mu;
    } catch (const Error& e) {
      mu_err[i] = std::string(to_string(e.code()));
    }
  });

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  std::vector<SweepRow> rows(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t k) {
    const auto [i, j] = pairs[k];
    SweepRow& r = rows[k];
    r.id1 = id(i);
    r.id2 = id(j);
    const auto t0 = std::chrono::steady_clock::now();
    try {
      if (!mu_err[i].empty()) {
        r.failed = true;
        r.branch = mu_err[i];
        return;
      }
      const NuResult nu = nu_metric(corpus.plants[i], corpus.plants[j], mc);
      const GapBracket g = gap_bracket(corpus.plants[i], corpus.plants[j], mc);
      r.d_nu = nu.value;
      r.branch = std::string(to_string(nu.branch));
      r.gap_lo = g.lower;
      r.gap_hi = g.upper;
      r.mu_best = mu[i];
      const double v1 = r.d_nu - r.gap_hi;
      const double v2 = r.gap_lo * r.mu_best - r.d_nu;
      r.violation = std::max(v1, v2);
      r.sandwich_ok = v1 <= kSandwichUpperTol && v2 <= kSandwichLowerTol;
    } catch (const Error& e) {
      r.failed = true;
      r.branch = std::string(to_string(e.code()));
    }
    if (rc.timing)
      r.ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
  });
  return rows;
}

inline int cmd_sweep(const std::string& path, const RunConfig& rc, std::ostream& out) {
  const Corpus corpus = parse_corpus(io::read_file(path));
  const std::vector<SweepRow> rows = run_sweep(corpus, rc);
  std::map<std::string, int> hist;
  int ok = 0;
  int failed = 0;
  double worst = 0.0;
  for (const SweepRow& r : rows) {
    ++hist[r.branch];
    ok += r.sandwich_ok ? 1 : 0;
    failed += r.failed ? 1 : 0;
    if (!r.failed) worst = std::max(worst, r.violation);
  }
  if (rc.output == "json") {
    io::Json jr = io::Json::array();
    for (const SweepRow& r : rows) {
      io::Json x{{"id1", r.id1}, {"id2", r.id2}, {"branch", r.branch}, {"ms", r.ms}};
      if (!r.failed) {
        x["d_nu"] = io::num9(r.d_nu);
        x["gap_lo"] = io::num9(r.gap_lo);
        x["gap_hi"] = io::num9(r.gap_hi);
        x["mu_best"] = io::num9(r.mu_best);
        x["sandwich_ok"] = r.sandwich_ok;
      }
      jr.push_back(x);
    }
    io::Json sum{{"rows", rows.size()}, {"sandwich_ok", ok}, {"failed", failed}, {"branches", hist}, {"max_violation", io::num9(worst)}};
    out << io::Json{{"rows", jr}, {"summary", sum}}.dump() << "\n";
    return kOk;
  }
  out << "id1,id2,d_nu,branch,gap_lo,gap_hi,mu_best,sandwich_ok,ms\n";
  for (const SweepRow& r : rows) {
    out << r.id1 << "," << r.id2 << ",";
    if (r.failed)
      out << "," << r.branch << ",,,,false," << r.ms << "\n";
    else
      out << io::fmt(r.d_nu) << "," << r.branch << "," << io::fmt(r.gap_lo) << "," << io::fmt(r.gap_hi) << "," << io::fmt(r.mu_best)
          << "," << (r.sandwich_ok ? "true" : "false") << "," << r.ms << "\n";
  }
  out << "# rows " << rows.size() << ", sandwich_ok " << ok << ", failed " << failed << "\n";
  out << "# branches";
  for (const auto& [k, v] : hist) out << " " << k << "=" << v;
  out << "\n# max_violation " << io::fmt(worst) << "\n";
  return kOk;
}

// --------------------------------------------------------------------------

inline std::string usage() {
  return "usage: nugap <nu|gap|margin|certify|index|toeplitz|sweep> <files...> [--tol T] [--grid N] [--fir L] "
         "[--seed S] [--output json|csv|text] [--timing] [--trace FILE]\n"
         "  nu p1.json p2.json          nu-gap metric with branch diagnostics\n"
         "  gap p1.json p2.json         certified gap-metric bracket\n"
         "  margin p.json c.json        closed-loop stability margin\n"
         "  certify p.json p2.json c.json  robustness inequality\n"
         "  index elem.json             index W of an element\n"
         "  toeplitz elem.json          finite-section diagnostic\n"
         "  sweep corpus.json           pairwise corpus sweep (CSV)\n";
}

/// Entry point shared by the binary and the tests. args excludes argv[0].
inline int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  if (args.empty()) {
    err << usage();
    return kUsage;
  }
  const std::string sub = args[0];
  const std::map<std::string, int> arity{{"nu", 2}, {"gap", 2}, {"margin", 2}, {"certify", 3},
                                         {"index", 1}, {"toeplitz", 1}, {"sweep", 1}};
  const auto it = arity.find(sub);
  if (it == arity.end()) {
    err << "unknown subcommand '" << sub << "'\n" << usage();
    return kUsage;
  }
  RunConfig rc;
  std::vector<std::string> files;
  CLI::App app{"nugap"};
  app.add_option("files", files)->required();
  app.add_option("--tol", rc.tol)->check(CLI::Range(1e-12, 1e-2));
  app.add_option("--ymax", rc.ymax_hint)->check(CLI::NonNegativeNumber);
  app.add_option("--grid", rc.grid);
  app.add_option("--fir", rc.fir)->check(CLI::PositiveNumber);
  app.add_option("--seed", rc.seed);
  app.add_option("--output", rc.output)->check(CLI::IsMember({"json", "csv", "text"}));
  app.add_flag("--timing", rc.timing);
  app.add_option("--trace", rc.trace);
  try {
    std::vector<std::string> rest(args.begin() + 1, args.end());
    std::reverse(rest.begin(), rest.end());  // CLI11 consumes from the back
    app.parse(rest);
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n" << usage();
    return kUsage;
  }
  if (!is_power_of_two(rc.grid) || rc.grid < 64) {
    err << "--grid must be a power of two >= 64\n";
    return kUsage;
  }
  if (8L * rc.fir > rc.grid) {
    err << "--fir must be <= grid / 8\n";
    return kUsage;
  }
  if (static_cast<int>(files.size()) != it->second) {
    err << sub << " expects " << it->second << " file(s)\n" << usage();
    return kUsage;
  }
  try {
    if (sub == "sweep") return cmd_sweep(files[0], rc, out);
    if (sub == "index" || sub == "toeplitz") {
      const LineElement e = io::parse_element(io::read_file(files[0]));
      return sub == "index" ? cmd_index(e, rc, out) : cmd_toeplitz(e, rc, out);
    }
    std::vector<PlantDesc> plants;
    for (const std::string& f : files) plants.push_back(io::parse_plant(io::read_file(f)));
    if (sub == "nu") return cmd_nu(plants, rc, out);
    if (sub == "gap") return cmd_gap(plants, rc, out);
    if (sub == "margin") return cmd_margin(plants, rc, out);
    return cmd_certify(plants, rc, out);
  } catch (const Error& e) {
    err << e.what() << "\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    err << "INTERNAL: " << e.what() << "\n";
    return kInternal;
  }
}

}  // namespace nugap::cli
