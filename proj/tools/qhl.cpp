// qhl: command-line driver for the quantized Hessian experiments.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "qhl/balanced.hpp"
#include "qhl/error.hpp"
#include "qhl/experiments.hpp"
#include "qhl/hessian.hpp"
#include "qhl/mabuchi.hpp"

namespace {

using namespace qhl;

struct Global {
  std::string config;
  std::string out;
  std::string cache;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
};

// Default config for `experiment`, then the TOML file, then flags.
ExperimentConfig load(const Global& g, const std::string& experiment) {
  ExperimentConfig c = default_config(experiment);
  if (!g.config.empty()) {
    c = apply_toml(c, parse_toml_file(g.config));
    c.name = experiment;
  }
  if (!g.out.empty()) c.out_dir = g.out;
  if (!g.cache.empty()) c.cache_dir = g.cache;
  if (g.seed) c.seed = *g.seed;
  if (g.jobs) c.jobs = *g.jobs;
  return c;
}

const GramCache* cache_for(const ExperimentConfig& c, std::optional<GramCache>& slot) {
  const char* env = std::getenv("QHL_CACHE");
  if (env && *env)
    slot.emplace(env);
  else if (!c.cache_dir.empty())
    slot.emplace(c.cache_dir);
  return slot ? &*slot : nullptr;
}

void write_file(const std::string& dir, const std::string& name, const std::string& text, bool append = false) {
  std::filesystem::create_directories(dir);
  const auto path = std::filesystem::path(dir) / name;
  const bool fresh = !append || !std::filesystem::exists(path);
  std::ofstream out(path, append ? std::ios::app : std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, fmt::format("cannot write '{}'", path.string()));
  if (append && !fresh) {
    // drop the header line
    out << text.substr(text.find('\n') + 1);
  } else {
    out << text;
  }
  std::cerr << "wrote " << path.string() << "\n";
}

int print_report(const ExperimentReport& r) {
  for (const auto& c : r.checks)
    std::cout << fmt::format("  [{}] {}: {} ({})\n", c.passed ? "ok" : "FAIL", c.name, num(c.value), c.bound);
  std::cout << fmt::format("criterion {} {}: {}\n", r.criterion, r.name, r.passed() ? "PASS" : "FAIL");
  return r.passed() ? 0 : 1;
}

int run_named(const Global& g, const std::string& name) {
  const ExperimentConfig c = load(g, name);
  const auto report = run_experiment(c);
  write_report(report, c.out_dir);
  return print_report(report);
}

// surface flags shared by the single-object subcommands
struct SurfaceFlags {
  std::string backend = "TorusPerturbed";
  double epsilon = 0.05;
  int resolution = 0;

  void attach(CLI::App* app) {
    app->add_option("--backend", backend, "SphereRound | SpherePerturbed | TorusFlat | TorusPerturbed")
        ->capture_default_str();
    app->add_option("--epsilon", epsilon, "perturbation size")->capture_default_str();
    app->add_option("--resolution", resolution, "quadrature resolution (0: automatic)");
  }
  KahlerSurface build(ExperimentConfig& c) const {
    c.surface.backend = backend_from_string(backend);
    c.surface.epsilon = epsilon;
    if (resolution > 0) c.surface.resolution = resolution;
    return KahlerSurface(c.surface_for(c.surface.backend));
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantized Hessian of the Mabuchi functional: experiments and acceptance suite"};
  app.require_subcommand(1);
  Global g;
  app.add_option("--config", g.config, "TOML config applied over the defaults")->check(CLI::ExistingFile);
  app.add_option("--out", g.out, "output directory");
  app.add_option("--cache", g.cache, "Gram cache directory (QHL_CACHE takes precedence)");
  app.add_option("--seed", g.seed, "RNG seed");
  app.add_option("--jobs", g.jobs, "threads across k")->check(CLI::PositiveNumber);

  // bergman
  auto* bergman = app.add_subcommand("bergman", "Bergman density rho_k at the quadrature nodes");
  SurfaceFlags bergman_surface;
  bergman_surface.attach(bergman);
  std::vector<int> bergman_k{8, 16};
  bool bergman_expansion = false;
  bergman->add_option("--k", bergman_k, "powers of L")->capture_default_str();
  bergman->add_flag("--expansion", bergman_expansion, "run the seeded expansion-fit experiment instead");

  // toeplitz
  auto* toe = app.add_subcommand("toeplitz", "Toeplitz kernel diagonals K_f and K_fg against their expansions");
  SurfaceFlags toe_surface;
  toe_surface.attach(toe);
  int toe_k = 16;
  std::string toe_f = "cos2pix", toe_g;
  bool toe_fit = false;
  toe->add_option("--k", toe_k)->capture_default_str();
  toe->add_option("--f", toe_f, "dictionary function")->capture_default_str();
  toe->add_option("--g", toe_g, "second function for K_fg");
  toe->add_flag("--fit", toe_fit, "run the coefficient-fit experiment over the dictionary instead");

  // hessian-spectrum
  auto* hs = app.add_subcommand("hessian-spectrum", "spectrum of P*P at Hilb_k(h)");
  SurfaceFlags hs_surface;
  hs_surface.backend = "TorusFlat";
  hs_surface.attach(hs);
  int hs_k = 16;
  hs->add_option("--k", hs_k)->capture_default_str();

  // mabuchi-spectrum
  auto* ms = app.add_subcommand("mabuchi-spectrum", "Galerkin spectrum of D*D");
  SurfaceFlags ms_surface;
  ms_surface.backend = "TorusFlat";
  ms_surface.attach(ms);
  int ms_order = 0, ms_count = 13;
  ms->add_option("--order", ms_order, "Galerkin order (0: default)");
  ms->add_option("--count", ms_count, "eigenpairs including lambda_0")->capture_default_str();

  // compare
  auto* cmp = app.add_subcommand("compare", "quantized vs smooth Hessian comparisons");
  std::vector<std::string> cmp_names{"xi-pairing-identity", "hessian-bilinear", "hessian-eigenvalues",
                                     "hessian-eigenspaces"};
  cmp->add_option("--experiment", cmp_names, "subset to run")->capture_default_str();

  // balance
  auto* bal = app.add_subcommand("balance", "balanced inner product by the T-iteration");
  SurfaceFlags bal_surface;
  bal_surface.attach(bal);
  int bal_k = 12, bal_max_iter = 200;
  double bal_tol = 1e-10;
  std::string bal_from = "h", bal_method = "anderson";
  bal->add_option("--k", bal_k)->capture_default_str();
  bal->add_option("--tol", bal_tol)->capture_default_str();
  bal->add_option("--max-iter", bal_max_iter)->capture_default_str();
  bal->add_option("--from", bal_from, "h: Hilb_k(h); perturbed: Hilb_k(h exp(-0.1 cos2pix cos2piy))")
      ->check(CLI::IsMember({"h", "perturbed"}))
      ->capture_default_str();
  bal->add_option("--method", bal_method)->check(CLI::IsMember({"anderson", "plain"}))->capture_default_str();

  // suite
  auto* suite = app.add_subcommand("suite", "run every acceptance experiment; nonzero exit on any failure");
  std::vector<std::string> only;
  suite->add_option("--only", only, "experiment names")->check(CLI::IsMember(experiment_names()));
  auto* list = app.add_subcommand("list", "list experiment names");

  CLI11_PARSE(app, argc, argv);

  try {
    // Single-object subcommands share the bergman-baseline defaults for
    // output/cache/seed handling.
    auto base = [&] {
      ExperimentConfig c = load(g, "bergman-baseline");
      c.name = app.get_subcommands().front()->get_name();
      return c;
    };

    if (*list) {
      for (const auto& n : experiment_names()) std::cout << n << "\n";
      return 0;
    }
    if (*bergman) {
      if (bergman_expansion) return run_named(g, "bergman-expansion");
      ExperimentConfig c = base();
      const KahlerSurface K = bergman_surface.build(c);
      std::optional<GramCache> slot;
      Table t{{"k", "node", "x", "y", "rho"}, {}};
      for (int k : bergman_k) {
        const auto st = QuantizedState::at_hilb(K, k, cache_for(c, slot));
        for (int p = 0; p < K.node_count(); ++p) {
          const auto& pt = K.nodes()[p].point;
          t.add({std::to_string(k), std::to_string(p), num(pt.x), num(pt.y), num(st.rho()[p])});
        }
        std::cout << fmt::format("k={} rho min {} max {}\n", k, num(st.rho().minCoeff()), num(st.rho().maxCoeff()));
      }
      write_file(c.out_dir, "bergman.csv", t.csv());
      return 0;
    }
    if (*toe) {
      if (toe_fit) return run_named(g, "toeplitz-expansion");
      ExperimentConfig c = base();
      const KahlerSurface K = toe_surface.build(c);
      std::optional<GramCache> slot;
      const auto st = QuantizedState::at_hilb(K, toe_k, cache_for(c, slot));
      const ScalarField f = fields::by_name(toe_f);
      HermitianOperator T = toeplitz(st, f);
      if (!toe_g.empty()) T = (T * toeplitz(st, fields::by_name(toe_g))).eval();
      const Eigen::VectorXd kd = quadratic_form_nodes(st, T);
      Eigen::VectorXd lead = sample(K, f);
      if (!toe_g.empty()) lead = lead.cwiseProduct(sample(K, fields::by_name(toe_g)));
      Table t{{"node", "x", "y", "kernel", "k_times_leading"}, {}};
      for (int p = 0; p < K.node_count(); ++p) {
        const auto& pt = K.nodes()[p].point;
        t.add({std::to_string(p), num(pt.x), num(pt.y), num(kd[p]), num(toe_k * lead[p])});
      }
      std::cout << fmt::format("k={} sup |K - k lead| = {}\n", toe_k, num((kd - toe_k * lead).cwiseAbs().maxCoeff()));
      write_file(c.out_dir, "toeplitz.csv", t.csv());
      return 0;
    }
    if (*hs) {
      ExperimentConfig c = base();
      const KahlerSurface K = hs_surface.build(c);
      std::optional<GramCache> slot;
      const auto st = QuantizedState::at_hilb(K, hs_k, cache_for(c, slot));
      const auto rep = pp_spectrum(assemble_form(st));
      write_file(c.out_dir, fmt::format("hessian-spectrum-k{}.json", hs_k), rep.to_json() + "\n");
      for (int j = 0; j < std::min<int>(13, rep.eigenvalues.size()); ++j)
        std::cout << fmt::format("j={} nu={} 64pi^3k^2nu={}\n", j, num(rep.eigenvalues[j]), num(rep.scaled[j]));
      return 0;
    }
    if (*ms) {
      ExperimentConfig c = base();
      const KahlerSurface K = ms_surface.build(c);
      const auto spec = mabuchi_spectrum(assemble_mabuchi(K, GalerkinBasis::for_surface(K, ms_order)), ms_count);
      write_file(c.out_dir, "mabuchi-spectrum.json", spec.to_json() + "\n");
      for (int j = 0; j < spec.eigenvalues.size(); ++j)
        std::cout << fmt::format("j={} lambda={}\n", j, num(spec.eigenvalues[j]));
      return 0;
    }
    if (*cmp) {
      int status = 0;
      for (const auto& n : cmp_names) status |= run_named(g, n);
      return status;
    }
    if (*bal) {
      ExperimentConfig c = base();
      const KahlerSurface K = bal_surface.build(c);
      const TIteration T(K, SectionBasis::for_surface(K, bal_k));
      BalanceOptions opt;
      opt.tol = bal_tol;
      opt.max_iter = bal_max_iter;
      opt.method = bal_method == "plain" ? BalanceMethod::Plain : BalanceMethod::Anderson;
      const InnerProduct start =
          bal_from == "h" ? InnerProduct{} : T.hilb(sample(K, fields::by_name("cos2pix_cos2piy")), 0.1);
      const auto res = balance(T, opt, start);
      write_file(c.out_dir, fmt::format("balance-k{}-{}.json", bal_k, bal_from), res.to_json() + "\n");
      Table row{{"backend", "epsilon", "k", "from", "method", "iterations", "defect"}, {}};
      row.add({std::string(to_string(K.backend())), num(K.epsilon()), std::to_string(bal_k), bal_from, bal_method,
               std::to_string(res.iterations), num(res.defect)});
      write_file(c.out_dir, "balance.csv", row.csv(), true);
      std::cout << fmt::format("k={} converged in {} iterations, defect {}\n", bal_k, res.iterations, num(res.defect));
      return 0;
    }
    if (*suite) {
      const auto names = only.empty() ? experiment_names() : only;
      int failed = 0;
      for (const auto& n : names) failed += run_named(g, n);
      std::cout << fmt::format("{} of {} experiments passed\n", names.size() - failed, names.size());
      return failed ? 1 : 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
