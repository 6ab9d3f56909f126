// qkdtool: finite-key rates, protocol simulation and self checks for the
// two-universal-hashing key distribution protocol.

#include <cmath>
#include <cstdio>
#include <map>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qkd/bits.hpp"
#include "qkd/pauli.hpp"
#include "qkd/protocol.hpp"
#include "qkd/rates.hpp"
#include "qkd/selftest.hpp"

using nlohmann::json;

namespace {

constexpr std::uint64_t kDefaultSeed = 0x5eed2017ULL;
constexpr const char* kVersion = "1.0.0";

constexpr int kExitOk = 0;
constexpr int kExitSelftestFailed = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitUsage = 64;

struct Output {
  std::string path;  // empty = stdout

  void write(const std::string& text) const {
    if (path.empty()) {
      std::cout << text;
      return;
    }
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open output file: " + path);
    f << text;
  }
};

json to_json(const qkd::TuhReport& r) {
  return json{{"schema", "qkd-rates-2uh-v1"},
              {"version", kVersion},
              {"n", r.n},
              {"delta", r.delta},
              {"epsilon", r.epsilon},
              {"rounding", qkd::to_string(r.rounding)},
              {"r", r.r},
              {"entropy_arg", r.h_arg},
              {"k", r.k},
              {"output_size", r.output_size},
              {"rate", r.rate},
              {"security", r.security_achieved},
              {"deviation", r.deviation},
              {"feasible", r.feasible}};
}

json to_json(const qkd::SamplingReport& r, const qkd::BoundReport& b) {
  return json{{"schema", "qkd-rates-sampling-v1"},
              {"version", kVersion},
              {"feasible", r.feasible},
              {"n_out", r.n_out},
              {"n_pe", r.n_pe},
              {"n_rk", r.n_rk},
              {"nu", r.nu},
              {"xi", r.xi},
              {"eps_ec", r.eps_ec},
              {"eps_pa", r.eps_pa},
              {"eps_pe", r.eps_pe},
              {"eps_qkd", r.eps_qkd_achieved},
              {"leakage", r.leakage},
              {"rate", r.rate},
              {"bound_c1", b.c1},
              {"bound_c2", b.c2},
              {"bound_rate", b.bound_rate}};
}

std::string render_tuh_csv(const qkd::TuhReport& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "n,delta,epsilon,rounding,r,k,output_size,rate,security,"
                "deviation,feasible\n"
                "%zu,%g,%g,%s,%zu,%zu,%lld,%.9f,%.6e,%.6e,%d\n",
                r.n, r.delta, r.epsilon, qkd::to_string(r.rounding).c_str(),
                r.r, r.k, static_cast<long long>(r.output_size), r.rate,
                r.security_achieved, r.deviation, r.feasible ? 1 : 0);
  return buf;
}

std::string render_tuh_text(const qkd::TuhReport& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "n=%zu delta=%g epsilon=%g rounding=%s\n"
                "r=%zu k=%zu output=%lld rate=%.6f\n"
                "security=%.3e deviation=%.6e feasible=%s\n",
                r.n, r.delta, r.epsilon, qkd::to_string(r.rounding).c_str(),
                r.r, r.k, static_cast<long long>(r.output_size), r.rate,
                r.security_achieved, r.deviation, r.feasible ? "yes" : "no");
  return buf;
}

// accepts "none", "fixed:alpha=<bits>,beta=<bits>" and
// "iid:pflip=<p>,pphase=<p>"
qkd::EveModel parse_eve(const std::string& spec, std::size_t n) {
  if (spec == "none") return qkd::EveModel::none(n);
  auto colon = spec.find(':');
  std::string kind = spec.substr(0, colon);
  std::map<std::string, std::string> kv;
  if (colon != std::string::npos) {
    std::string rest = spec.substr(colon + 1);
    std::size_t pos = 0;
    while (pos < rest.size()) {
      std::size_t comma = rest.find(',', pos);
      std::string item = rest.substr(pos, comma - pos);
      auto eq = item.find('=');
      if (eq == std::string::npos)
        throw std::invalid_argument("bad eve option: " + item);
      kv[item.substr(0, eq)] = item.substr(eq + 1);
      pos = comma == std::string::npos ? rest.size() : comma + 1;
    }
  }
  if (kind == "fixed") {
    return qkd::EveModel::fixed(qkd::BitVector::from_string(kv.at("alpha")),
                                qkd::BitVector::from_string(kv.at("beta")));
  }
  if (kind == "iid") {
    double pf = kv.count("pflip") ? std::stod(kv.at("pflip")) : 0.0;
    double pp = kv.count("pphase") ? std::stod(kv.at("pphase")) : 0.0;
    return qkd::EveModel::iid(n, pf, pp);
  }
  throw std::invalid_argument("unknown eve model: " + kind);
}

std::vector<std::size_t> log_grid(std::size_t lo, std::size_t hi,
                                  std::size_t points) {
  std::vector<std::size_t> out;
  if (points < 2 || lo >= hi) {
    out.push_back(lo);
    return out;
  }
  double a = std::log(static_cast<double>(lo));
  double b = std::log(static_cast<double>(hi));
  for (std::size_t i = 0; i < points; ++i) {
    double t = a + (b - a) * static_cast<double>(i) / (points - 1);
    auto n = static_cast<std::size_t>(std::llround(std::exp(t)));
    if (out.empty() || n > out.back()) out.push_back(n);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finite-key rates and simulation for two-universal hashing QKD"};
  app.require_subcommand(1);
  app.fallthrough(true);

  std::uint64_t seed = kDefaultSeed;
  app.add_option("--seed", seed, "master seed (default 0x5eed2017)")
      ->capture_default_str();

  Output out;
  app.add_option("--out", out.path, "write output to a file instead of stdout");

  std::string format = "text";
  app.add_option("--format", format, "output format")
      ->check(CLI::IsMember({"text", "json", "csv"}));

  // rates-2uh
  auto* c2uh = app.add_subcommand("rates-2uh", "finite-key rate of the hashing protocol");
  std::size_t n2 = 3100;
  double delta2 = 0.0451, eps2 = 1e-80;
  std::string rounding2 = "floor";
  std::size_t target_bits = 0;
  c2uh->add_option("--n", n2, "block size")->capture_default_str();
  c2uh->add_option("--delta", delta2, "tolerated error rate")->capture_default_str();
  c2uh->add_option("--epsilon", eps2, "security parameter")->capture_default_str();
  c2uh->add_option("--rounding", rounding2, "r rounding: floor, ceil or direct")
      ->check(CLI::IsMember({"floor", "ceil", "direct"}))
      ->capture_default_str();
  c2uh->add_option("--min-out", target_bits,
                   "instead: report the smallest n with this many output bits");

  // rates-sampling
  auto* csamp = app.add_subcommand("rates-sampling",
                                   "finite-key rate of the sampling baseline");
  std::size_t ns = 3100;
  double deltas = 0.0451, epss = 1e-6;
  csamp->add_option("--n", ns, "block size")->capture_default_str();
  csamp->add_option("--delta", deltas, "tolerated error rate")->capture_default_str();
  csamp->add_option("--eps-qkd", epss, "total security budget")->capture_default_str();

  // compare
  auto* ccmp = app.add_subcommand("compare", "rate curves of both protocols plus the sampling bound");
  double deltac = 0.0451, epsc = 1e-6;
  std::size_t nlo = 200, nhi = 100000, points = 20;
  ccmp->add_option("--delta", deltac, "tolerated error rate")->capture_default_str();
  ccmp->add_option("--epsilon", epsc, "security parameter")->capture_default_str();
  ccmp->add_option("--n-min", nlo, "smallest block size")->capture_default_str();
  ccmp->add_option("--n-max", nhi, "largest block size")->capture_default_str();
  ccmp->add_option("--points", points, "grid points, log spaced")->capture_default_str();

  // simulate
  auto* csim = app.add_subcommand("simulate", "run the protocol");
  std::size_t nn = 64, kk = 24, rr = 2, trials = 1000;
  std::string backend = "fast", eve_spec = "none";
  std::string matrix_file, transcript_file;
  csim->add_option("--n", nn, "block size")->capture_default_str();
  csim->add_option("--k", kk, "syndrome size")->capture_default_str();
  csim->add_option("--r", rr, "tolerated errors")->capture_default_str();
  csim->add_option("--trials", trials, "number of runs")->capture_default_str();
  csim->add_option("--backend", backend, "fast or statevector")
      ->check(CLI::IsMember({"fast", "statevector"}))
      ->capture_default_str();
  csim->add_option("--eve", eve_spec,
                   "error model: none, fixed:alpha=<bits>,beta=<bits>, or "
                   "iid:pflip=<p>,pphase=<p>")
      ->capture_default_str();
  csim->add_option("--matrix-file", matrix_file,
                   "fixed key matrix L, one row of 0/1 per line");
  csim->add_option("--transcript", transcript_file,
                   "also write the transcript of the first run to this file");

  // selftest
  auto* cself = app.add_subcommand("selftest", "run internal consistency suites");
  std::vector<std::string> suites;
  cself->add_option("--suite", suites, "suite names (default: all)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*c2uh) {
      if (target_bits > 0) {
        std::size_t nmin = qkd::min_blocksize(delta2, eps2, target_bits,
                                              qkd::rounding_from_string(rounding2));
        if (format == "json") {
          out.write(json{{"schema", "qkd-min-blocksize-v1"},
                         {"delta", delta2},
                         {"epsilon", eps2},
                         {"target_bits", target_bits},
                         {"rounding", rounding2},
                         {"n", nmin}}
                        .dump(2) +
                    "\n");
        } else {
          out.write("min blocksize for " + std::to_string(target_bits) +
                    " bits: n=" + std::to_string(nmin) + "\n");
        }
        return kExitOk;
      }
      qkd::TuhReport rep = qkd::tuh_report(
          {n2, delta2, eps2, qkd::rounding_from_string(rounding2)});
      if (format == "json") {
        json j = to_json(rep);
        j["seed"] = seed;
        out.write(j.dump(2) + "\n");
      } else if (format == "csv") {
        out.write(render_tuh_csv(rep));
      } else {
        out.write(render_tuh_text(rep));
      }
      return rep.feasible ? kExitOk : kExitInfeasible;
    }

    if (*csamp) {
      qkd::SamplingReport rep = qkd::sampling_optimize({ns, deltas, epss});
      qkd::BoundReport bound = qkd::sampling_upper_bound(ns, deltas, epss);
      if (format == "json") {
        json j = to_json(rep, bound);
        j["seed"] = seed;
        out.write(j.dump(2) + "\n");
      } else {
        char buf[512];
        std::snprintf(buf, sizeof buf,
                      "n=%zu delta=%g eps_qkd=%g\n"
                      "n_out=%lld n_pe=%zu nu=%.5f xi=%.5f\n"
                      "eps_ec=%.3e eps_pa=%.3e eps_pe=%.3e achieved=%.3e\n"
                      "rate=%.6f bound_rate=%.6f feasible=%s\n",
                      ns, deltas, epss, static_cast<long long>(rep.n_out),
                      rep.n_pe, rep.nu, rep.xi, rep.eps_ec, rep.eps_pa,
                      rep.eps_pe, rep.eps_qkd_achieved, rep.rate,
                      bound.bound_rate, rep.feasible ? "yes" : "no");
        out.write(buf);
      }
      return rep.feasible ? kExitOk : kExitInfeasible;
    }

    if (*ccmp) {
      auto rows = qkd::compare_curves(deltac, epsc, log_grid(nlo, nhi, points));
      std::string text = qkd::curves_csv_header() + "\n";
      for (const auto& row : rows) text += qkd::to_csv(row) + "\n";
      out.write(text);
      return kExitOk;
    }

    if (*csim) {
      qkd::ProtocolParams params{nn, kk, rr};
      qkd::validate(params);
      qkd::EveModel eve = parse_eve(eve_spec, nn);
      qkd::Backend be = qkd::backend_from_string(backend);

      if (!transcript_file.empty() || !matrix_file.empty()) {
        qkd::Rng rng(qkd::child_seed(seed, 0));
        auto [alpha, beta] = eve.sample(rng);
        qkd::BitMatrix l;
        if (!matrix_file.empty()) {
          std::ifstream f(matrix_file);
          if (!f) throw std::runtime_error("cannot read matrix file: " + matrix_file);
          std::string text((std::istreambuf_iterator<char>(f)),
                           std::istreambuf_iterator<char>());
          l = qkd::BitMatrix::from_text(text);
        } else {
          l = qkd::sample_invertible(nn, rng);
        }
        qkd::RunRecord rec = qkd::run_with_schedule(
            params, qkd::key_schedule(l, kk), alpha, beta, be, rng);
        rec.seed = qkd::child_seed(seed, 0);
        if (!transcript_file.empty()) {
          std::ofstream f(transcript_file);
          if (!f) throw std::runtime_error("cannot write transcript: " + transcript_file);
          f << qkd::transcript_serialize(rec);
        }
      }

      qkd::BatchSummary s = qkd::run_batch(params, eve, be, seed, trials);
      out.write(qkd::summary_json(s) + "\n");
      return kExitOk;
    }

    if (*cself) {
      auto results = qkd::run_selftest(suites, seed);
      bool all_ok = true;
      for (const auto& r : results) all_ok = all_ok && r.passed;
      if (format == "json") {
        json items = json::array();
        for (const auto& r : results)
          items.push_back(json{{"suite", r.name},
                               {"passed", r.passed},
                               {"detail", r.detail},
                               {"millis", r.millis}});
        out.write(json{{"schema", "qkd-selftest-v1"},
                       {"version", kVersion},
                       {"seed", seed},
                       {"passed", all_ok},
                       {"suites", items}}
                      .dump(2) +
                  "\n");
      } else {
        std::string text;
        for (const auto& r : results) {
          char buf[512];
          std::snprintf(buf, sizeof buf, "%-10s %s  (%.0f ms)  %s\n",
                        r.name.c_str(), r.passed ? "PASS" : "FAIL", r.millis,
                        r.detail.c_str());
          text += buf;
        }
        text += "seed: " + std::to_string(seed) + "\n";
        out.write(text);
      }
      return all_ok ? kExitOk : kExitSelftestFailed;
    }
  } catch (const qkd::ResourceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInfeasible;
  }
  return kExitOk;
}
