// Acceptance suite: one PASS/FAIL line per criterion. Every tolerance, size
// and seed is fixed below; supporting tables are written to --out-dir.

#include "oracles.hpp"

#include "tndipw/enumeration.hpp"
#include "tndipw/errors.hpp"
#include "tndipw/estimators.hpp"
#include "tndipw/glm.hpp"
#include "tndipw/harness.hpp"
#include "tndipw/rng.hpp"
#include "tndipw/sampling.hpp"
#include "tndipw/simulator.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace tndipw;
namespace fs = std::filesystem;

namespace {

// ---- Pinned tolerances and sizes -------------------------------------------

// 1: kernel oracle
constexpr int kKernelInstances = 50;
constexpr int kKernelMaxAttempts = 1000;
constexpr double kKernelTolerance = 1e-4;
constexpr double kKernelSeconds = 10.0;
constexpr std::uint64_t kKernelSeed = 101;

// 2: exact identifiability
constexpr int kIdentSpecs = 60;
constexpr double kIdentTolerance = 1e-6;
constexpr double kIdentSeconds = 30.0;
constexpr std::uint64_t kIdentSeed = 202;

// 3: scenario 1 pattern (desk profile)
constexpr std::size_t kS1Replicates = 300;
constexpr std::size_t kS1Bootstrap = 200;
constexpr double kRelTolerance = 0.10;
constexpr double kBiasedLowFactor = 0.80;
constexpr double kCoverageLow = 85.0;
constexpr double kCoverageHigh = 97.0;

// 4: scenario 2 separation of targets (desk profile, point estimates only)
constexpr std::size_t kS2Replicates = 300;
constexpr std::size_t kS2Bootstrap = 0;

// 5: scenario 3 (paper-size population and samples)
constexpr std::size_t kS3Replicates = 200;
constexpr std::size_t kS3Bootstrap = 200;
constexpr double kS3AdjustCoverageMin = 85.0;
constexpr double kS3BiasedCoverageMax = 50.0;

// 6: conditional-independence audit
constexpr std::size_t kAuditPopulation = 1'000'000;
constexpr std::uint64_t kAuditSeed = 606;  // fixed before the first run
constexpr double kAuditZ = 1.959963984540054;

// 7: determinism and invariants
constexpr double kInvariantSeconds = 60.0;
constexpr std::uint64_t kInvariantSeed = 707;

// ---- Helpers ---------------------------------------------------------------

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

bool within_rel(double value, double target, double tol) { return std::abs(value / target - 1.0) <= tol; }

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

void save_report(const fs::path& dir, const std::string& stem, const ExperimentReport& report) {
  write_file(dir / (stem + "_table.txt"), render_table(report));
  write_file(dir / (stem + "_summary.kv"), render_key_values(report));
  std::ofstream csv(dir / (stem + "_replicates.csv"));
  write_replicates_csv(csv, report.replicates);
}

glm::DesignMatrix design_from_rows(const std::vector<std::vector<double>>& rows, std::size_t k) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < k; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  std::vector<std::string> labels{"(Intercept)"};
  for (std::size_t j = 1; j < k; ++j) labels.push_back(fmt::format("z{}", j));
  return {m, labels};
}

// ---- 1. Kernel oracle ------------------------------------------------------

Outcome kernel_oracle(std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 gen(kKernelSeed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int compared = 0, skipped = 0, skipped_also_flagged = 0, attempts = 0;
  double worst = 0.0;
  while (compared < kKernelInstances && attempts < kKernelMaxAttempts) {
    ++attempts;
    const std::size_t k = 1 + static_cast<std::size_t>(u(gen) * 3.0);   // 1..3 columns
    const std::size_t n = 8 + static_cast<std::size_t>(u(gen) * 23.0);  // 8..30 rows
    std::vector<double> truth(k);
    for (auto& b : truth) b = 2.0 * u(gen) - 1.0;
    oracle::Problem p;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> row{1.0};
      for (std::size_t j = 1; j < k; ++j) row.push_back(j == 1 ? (u(gen) < 0.5 ? 1.0 : 0.0) : 2.0 * u(gen) - 1.0);
      double eta = 0.0;
      for (std::size_t j = 0; j < k; ++j) eta += row[j] * truth[j];
      p.y.push_back(u(gen) < oracle::expit(eta) ? 1.0 : 0.0);
      p.w.push_back(1.0);
      p.x.push_back(std::move(row));
    }
    const auto ref = oracle::maximize_likelihood(p, k);
    std::optional<glm::FitResult> fit;
    try {
      fit = glm::fit_logistic(design_from_rows(p.x, k), p.y);
    } catch (const Error&) {
    }
    if (!ref) {
      // No finite maximizer found by the oracle: separated or degenerate data.
      ++skipped;
      if (!fit) ++skipped_also_flagged;
      continue;
    }
    ++compared;
    if (!fit) {
      worst = INFINITY;
      continue;
    }
    for (std::size_t j = 0; j < k; ++j)
      worst = std::max(worst, std::abs(fit->coefficients[static_cast<Eigen::Index>(j)] - (*ref)[j]));
  }
  const double secs = seconds_since(start);
  log << fmt::format("  compared {} instances ({} attempts, {} skipped without a finite maximizer, {} of those also "
                     "rejected by IRLS); max |diff| = {:.3g}; {:.2f} s\n",
                     compared, attempts, skipped, skipped_also_flagged, worst, secs);
  const bool pass = compared == kKernelInstances && worst <= kKernelTolerance && secs < kKernelSeconds;
  return {pass, fmt::format("{} instances, max |diff| {:.2g} <= {:g}, {:.1f} s < {:g} s", compared, worst,
                            kKernelTolerance, secs, kKernelSeconds)};
}

// ---- 2. Exact identifiability ----------------------------------------------

Outcome exact_identifiability(std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 gen(kIdentSeed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto range = [&](double lo, double hi) { return lo + (hi - lo) * u(gen); };
  int solved = 0, with_h = 0;
  double worst = 0.0;
  for (int i = 0; i < kIdentSpecs; ++i) {
    ScenarioSpec s;
    s.id = 0;
    s.calibration.reset();
    s.p_c = range(0.2, 0.8);
    s.p_x_given_c = {range(0.1, 0.6), range(0.1, 0.6)};
    s.p_u = range(0.1, 0.6);
    s.p_h = (i % 2 == 0) ? range(0.1, 0.5) : 0.0;
    // Infection depends on (x, c) only, so the construction coefficient is the
    // estimand of y1 ~ 1 + x + c; everything else is randomized freely.
    s.infection = {range(-3.0, -0.5), range(-1.0, 1.5), range(-1.0, 1.0), 0.0, 0.0};
    s.other_infection = {range(-3.0, -1.0), range(-1.0, 1.0), range(-1.0, 1.0), range(-1.0, 1.0)};
    s.symptoms = {range(0.01, 0.2), range(0.3, 0.9), range(0.2, 0.7)};
    s.testing = {range(-4.0, -1.0), range(0.5, 3.0), range(-1.0, 1.0), range(-1.0, 1.0), range(-1.0, 1.0), 0.0, 0.0};
    if (s.has_h()) {
      s.testing.h = range(-1.0, 1.5);
      s.testing.xh = range(-1.0, 1.5);
      ++with_h;
    }
    validate(s);
    const JointDistribution joint(s);
    const auto fit = exact_ipw_fit(joint, s.has_h());
    worst = std::max(worst, std::abs(fit.coefficients[1] - s.infection.x));
    ++solved;
  }
  const double secs = seconds_since(start);
  log << fmt::format("  {} random specs ({} with H loading on testing); max |bx - beta| = {:.3g}; {:.2f} s\n", solved,
                     with_h, worst, secs);
  const bool pass = solved >= 50 && worst <= kIdentTolerance && secs < kIdentSeconds;
  return {pass, fmt::format("{} specs, max |diff| {:.2g} <= {:g}, {:.1f} s < {:g} s", solved, worst, kIdentTolerance,
                            secs, kIdentSeconds)};
}

// ---- 3. Scenario 1 pattern -------------------------------------------------

Outcome scenario1(const fs::path& dir, std::ostream& log) {
  auto cfg = profile_config(Profile::desk, 1);
  cfg.replicates = kS1Replicates;
  cfg.bootstrap_b = kS1Bootstrap;
  const auto start = std::chrono::steady_clock::now();
  const auto report = run_experiment(cfg);
  save_report(dir, "scenario1", report);
  log << render_table(report);
  const double beta = 2.5;
  const double rel = report.truth.true_relative_or;
  const auto& ipw = report.summary(AnalysisMethod::ipw_correct);
  const auto& tnd = report.summary(AnalysisMethod::proper_tnd);
  const auto& tested = report.summary(AnalysisMethod::tested_only);
  const auto& omitted = report.summary(AnalysisMethod::ipw_omitted_w);
  const bool a = within_rel(ipw.mean_est, beta, kRelTolerance);
  const bool b = within_rel(tnd.mean_est, rel, kRelTolerance);
  const bool c = tested.mean_est <= kBiasedLowFactor * beta && omitted.mean_est <= kBiasedLowFactor * beta;
  const bool d = ipw.coverage_beta >= kCoverageLow && ipw.coverage_beta <= kCoverageHigh;
  log << fmt::format("  ipw-correct within 10% of 2.5: {}; proper-tnd within 10% of relative OR {:.3f}: {}; "
                     "tested-only and omitted-w <= {:.2f}: {}; ipw-correct coverage in [85, 97]: {}; {:.0f} s\n",
                     a, rel, b, kBiasedLowFactor * beta, c, d, seconds_since(start));
  return {a && b && c && d,
          fmt::format("ipw-correct {:.2f} (2.5), tnd {:.2f} (rel {:.2f}), tested-only {:.2f}, omitted-w {:.2f}, "
                      "ipw coverage {:.1f}%",
                      ipw.mean_est, tnd.mean_est, rel, tested.mean_est, omitted.mean_est, ipw.coverage_beta)};
}

// ---- 4. Scenario 2 separation of targets -----------------------------------

Outcome scenario2(const fs::path& dir, std::ostream& log) {
  auto cfg = profile_config(Profile::desk, 2);
  cfg.replicates = kS2Replicates;
  cfg.bootstrap_b = kS2Bootstrap;
  const auto start = std::chrono::steady_clock::now();
  const auto report = run_experiment(cfg);
  save_report(dir, "scenario2", report);
  log << render_table(report);
  const double beta = 1.5;
  const double rel = report.truth.true_relative_or;
  const auto& tnd = report.summary(AnalysisMethod::proper_tnd);
  const auto& tp = report.summary(AnalysisMethod::testpos_vs_controls);
  const auto& ipw = report.summary(AnalysisMethod::ipw_correct);
  const bool a = rel > 1.0 && rel < 1.5;
  const bool b = within_rel(tnd.mean_est, rel, kRelTolerance);
  const bool c = within_rel(tp.mean_est, beta, kRelTolerance) && within_rel(ipw.mean_est, beta, kRelTolerance);
  log << fmt::format("  relative OR in (1, 1.5): {}; tnd tracks it: {}; testpos and ipw-correct track 1.5: {}; {:.0f} s\n",
                     a, b, c, seconds_since(start));
  return {a && b && c, fmt::format("relative OR {:.3f}, tnd {:.2f}, testpos {:.2f}, ipw-correct {:.2f}", rel,
                                   tnd.mean_est, tp.mean_est, ipw.mean_est)};
}

// ---- 5. Scenario 3 health-care-seeking behaviour ----------------------------

Outcome scenario3(const fs::path& dir, std::ostream& log) {
  auto cfg = profile_config(Profile::paper, 3);
  cfg.replicates = kS3Replicates;
  cfg.bootstrap_b = kS3Bootstrap;
  const auto start = std::chrono::steady_clock::now();
  const auto report = run_experiment(cfg);
  save_report(dir, "scenario3", report);
  log << render_table(report);
  const double truth = report.truth.true_or;
  const auto& adjust = report.summary(AnalysisMethod::ipw_adjust_hcsb);
  const auto& omit = report.summary(AnalysisMethod::ipw_omit_hcsb);
  const auto& tnd = report.summary(AnalysisMethod::proper_tnd);
  const auto& tp = report.summary(AnalysisMethod::testpos_vs_controls);
  const bool a = within_rel(adjust.mean_est, truth, kRelTolerance) && adjust.coverage_beta >= kS3AdjustCoverageMin;
  // The proper TND is judged against its own target (beta*); the others against beta.
  const bool b = tnd.coverage_beta_star <= kS3BiasedCoverageMax && tp.coverage_beta <= kS3BiasedCoverageMax &&
                 omit.coverage_beta <= kS3BiasedCoverageMax;
  log << fmt::format("  adjust-hcsb within 10% of {:.3f} with coverage >= 85: {}; tnd (beta*), testpos and "
                     "omit-hcsb coverage <= 50: {}; {:.0f} s\n",
                     truth, a, b, seconds_since(start));
  return {a && b, fmt::format("adjust {:.2f} (truth {:.2f}) cov {:.1f}%; cov tnd* {:.1f}%, testpos {:.1f}%, omit {:.1f}%",
                              adjust.mean_est, truth, adjust.coverage_beta, tnd.coverage_beta_star, tp.coverage_beta,
                              omit.coverage_beta)};
}

// ---- 6. Conditional-independence audit -------------------------------------

Outcome independence_audit(const fs::path& dir, std::ostream& log) {
  const auto pop = generate_population(default_scenario(1), kAuditPopulation, kAuditSeed);
  // counts[x][c][w][t][y1]
  double counts[2][2][2][2][2] = {};
  for (const auto& r : pop.records) counts[r.x][r.c][r.w][r.t][r.y1] += 1.0;
  std::ostringstream table;
  table << "x,c,w,tested_infected,tested_uninfected,untested_infected,untested_uninfected,log_or,se,z\n";
  int inside = 0;
  for (int x = 0; x < 2; ++x)
    for (int c = 0; c < 2; ++c)
      for (int w = 0; w < 2; ++w) {
        const auto& k = counts[x][c][w];
        const auto t = oracle::woolf(k[1][1], k[1][0], k[0][1], k[0][0]);
        const double z = t.log_or / t.se;
        if (std::abs(z) <= kAuditZ) ++inside;
        table << fmt::format("{},{},{},{},{},{},{},{:.4f},{:.4f},{:.3f}\n", x, c, w, k[1][1], k[1][0], k[0][1],
                             k[0][0], t.log_or, t.se, z);
      }
  write_file(dir / "independence_audit.csv", table.str());
  log << table.str();
  return {inside == 8, fmt::format("{}/8 (x, c, w) strata have OR 1 inside the 95% interval (seed {})", inside,
                                   kAuditSeed)};
}

// ---- 7. Determinism and invariants -----------------------------------------

Outcome determinism(std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  std::vector<std::string> failures;

  // Whole-experiment output under different thread counts.
  auto cfg = profile_config(Profile::desk, 1);
  cfg.replicates = 6;
  cfg.bootstrap_b = 20;
  cfg.truth_population_size = 200'000;
  cfg.base_seed = kInvariantSeed;
  std::string reference_csv, reference_kv;
  for (const std::size_t threads : {1, 2, 5}) {
    cfg.threads = threads;
    const auto report = run_experiment(cfg);
    std::ostringstream csv;
    write_replicates_csv(csv, report.replicates);
    const std::string kv = render_key_values(report);
    if (reference_csv.empty()) {
      reference_csv = csv.str();
      reference_kv = kv;
    } else if (csv.str() != reference_csv || kv != reference_kv) {
      failures.push_back(fmt::format("output differs with {} threads", threads));
    }
  }
  cfg.threads = 1;
  {
    std::ostringstream again;
    write_replicates_csv(again, run_experiment(cfg).replicates);
    if (again.str() != reference_csv) failures.push_back("repeat run differs");
  }

  // Population and bootstrap streams.
  const auto spec = default_scenario(1);
  const auto p1 = generate_population(spec, 300'000, kInvariantSeed, 1);
  const auto p4 = generate_population(spec, 300'000, kInvariantSeed, 4);
  if (p1.records != p4.records) failures.push_back("population differs across thread counts");
  const auto sample = sample_case_control(p1, 400, 400, kInvariantSeed);
  const auto ipw_spec = IpwSpec::for_variant(IpwVariant::correct);
  const auto b1 = bootstrap_ci(sample, ipw_spec, 30, 0.95, kInvariantSeed, 1);
  const auto b3 = bootstrap_ci(sample, ipw_spec, 30, 0.95, kInvariantSeed, 3);
  if (b1.estimates != b3.estimates) failures.push_back("bootstrap differs across thread counts");

  // Weight-scale invariance of the weighted fit, on the stage-3 problem itself.
  const auto fit = fit_ipw(sample, ipw_spec);
  for (const double scale : {1e-4, 3.0, 1e4}) {
    std::vector<double> w = fit.weights;
    for (auto& v : w) v *= scale;
    const auto scaled = glm::fit_weighted_logistic(fit.outcome_design, fit.q_hat, w);
    const double diff = (scaled.coefficients - fit.outcome_model.coefficients).cwiseAbs().maxCoeff();
    if (diff > 1e-8) failures.push_back(fmt::format("weight scale {} changes coefficients by {:.3g}", scale, diff));
  }

  // Case-control weight sum identity.
  for (const double q0 : {0.0005, 0.002, 0.02}) {
    const auto w = case_control_weights(sample, q0);
    const double sum = std::accumulate(w.begin(), w.end(), 0.0);
    if (std::abs(sum - static_cast<double>(sample.n_tested)) > 1e-9 * static_cast<double>(sample.n_tested)) {
      failures.push_back(fmt::format("weights sum to {} for q0 = {}", sum, q0));
    }
  }

  // Bootstrap stratum sizes.
  for (std::uint64_t b = 0; b < 20; ++b) {
    const auto r = bootstrap_resample(sample, derive_seed(kInvariantSeed, {b}));
    std::size_t tested = 0;
    for (const auto& rec : r.records) tested += rec.tested();
    if (tested != sample.n_tested || r.size() - tested != sample.n_controls || r.n_tested != sample.n_tested ||
        r.n_controls != sample.n_controls) {
      failures.push_back(fmt::format("bootstrap {} changes stratum sizes", b));
    }
  }

  const double secs = seconds_since(start);
  if (secs >= kInvariantSeconds) failures.push_back(fmt::format("took {:.1f} s", secs));
  for (const auto& f : failures) log << "  " << f << '\n';
  log << fmt::format("  {:.1f} s\n", secs);
  return {failures.empty(), failures.empty() ? fmt::format("all checks hold, {:.1f} s", secs) : failures.front()};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::string out_dir = "acceptance";
  std::vector<int> only;
  app.add_option("--out-dir", out_dir, "Directory for tables and logs");
  app.add_option("--only", only, "Run only these criteria")->check(CLI::Range(1, 7));
  CLI11_PARSE(app, argc, argv);
  const fs::path dir(out_dir);
  fs::create_directories(dir);
  std::ofstream log(dir / "acceptance_log.txt");

  using Runner = std::function<Outcome()>;
  const std::vector<std::pair<std::string, Runner>> criteria{
      {"kernel oracle", [&] { return kernel_oracle(log); }},
      {"exact identifiability", [&] { return exact_identifiability(log); }},
      {"scenario 1 pattern", [&] { return scenario1(dir, log); }},
      {"scenario 2 separation of targets", [&] { return scenario2(dir, log); }},
      {"scenario 3 health-care seeking", [&] { return scenario3(dir, log); }},
      {"conditional-independence audit", [&] { return independence_audit(dir, log); }},
      {"determinism and invariants", [&] { return determinism(log); }},
  };
  const std::set<int> selected(only.begin(), only.end());
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int number = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(number)) continue;
    log << fmt::format("== {}. {}\n", number, criteria[i].first);
    Outcome outcome;
    try {
      outcome = criteria[i].second();
    } catch (const std::exception& e) {
      outcome = {false, fmt::format("error: {}", e.what())};
    }
    const std::string line =
        fmt::format("{} criterion {}: {} -- {}", outcome.pass ? "PASS" : "FAIL", number, criteria[i].first,
                    outcome.detail);
    std::cout << line << std::endl;
    log << line << "\n\n";
    log.flush();
    failed += outcome.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
