// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "rpkf/cli/csv.hpp"
#include "rpkf/cli/run.hpp"
#include "rpkf/rpkf.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
namespace rt = rpkf::testing;
using rpkf::Matrix;
using rpkf::MatrixDist;
using rpkf::RandomMatrixSpec;
using rpkf::Vector;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  const char* id;
  const char* title;
  double budget_s;
  std::function<Outcome()> check;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

double mean_over(const std::vector<double>& v, std::size_t first, std::size_t last) {
  // Steps are 1-based; v[k - 1] is step k.
  double s = 0.0;
  for (std::size_t k = first; k <= last; ++k) s += v[k - 1];
  return s / static_cast<double>(last - first + 1);
}

// A1 ----------------------------------------------------------------------

Outcome oracle_equivalence() {
  std::mt19937_64 gen(101);
  std::uniform_int_distribution<int> dim(1, 3);
  std::uniform_int_distribution<int> count(1, 3);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int r = dim(gen);
    const int n = dim(gen);
    const std::size_t horizon = static_cast<std::size_t>(dim(gen));
    const rpkf::UncertainObsModel model{
        rt::random_dist(n, r, static_cast<std::size_t>(count(gen)), gen), {}, rt::random_spd(n, gen),
        rpkf::moments_from_dist(rt::random_dist(r, r, static_cast<std::size_t>(count(gen)), gen)),
        rt::random_spd(r, gen)};
    const auto provider = rpkf::make_provider(model, &rpkf::build_uncertain_obs);
    const rpkf::InitialCondition ic{rt::random_vector(r, gen, -3, 3), rt::random_spd(r, gen)};
    const auto traj = rpkf::simulate_truth(provider, ic, horizon, gen());

    const auto oracle = rpkf::batch_lmv_oracle(provider, ic, traj.measurements);
    rpkf::RandomParameterFilter filter(provider, ic);
    for (const auto& y : traj.measurements) filter.step(y);
    worst = std::max({worst, rpkf::linalg::relative_error(filter.state().mean, oracle.mean),
                      rpkf::linalg::relative_error(filter.state().cov, oracle.cov)});
  }
  return {worst <= 1e-9, fmt("200 instances, max relative error %.3g (limit 1e-9)", worst)};
}

// A2 ----------------------------------------------------------------------

Outcome standard_reduction() {
  std::mt19937_64 gen(202);
  std::uniform_int_distribution<int> dim(1, 4);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int r = dim(gen);
    const int n = dim(gen);
    const Matrix f = rt::random_stable(r, gen);
    const Matrix h = rt::random_matrix(n, r, gen);
    const Matrix q = rt::random_spd(r, gen);
    const Matrix rw = rt::random_spd(n, gen);
    const auto provider = rpkf::constant_provider(
        {RandomMatrixSpec::deterministic(f), RandomMatrixSpec::deterministic(h), q, rw});
    const rpkf::InitialCondition ic{rt::random_vector(r, gen, -5, 5), rt::random_spd(r, gen)};
    const auto traj = rpkf::simulate_truth(provider, ic, 50, gen());

    rpkf::RandomParameterFilter filter(provider, ic);
    rt::TextbookKf kf{ic.mean, ic.cov};
    for (const auto& y : traj.measurements) {
      filter.step(y);
      kf.step(f, q, h, rw, y);
      worst = std::max({worst, rpkf::linalg::relative_error(filter.state().mean, kf.x),
                        rpkf::linalg::relative_error(filter.state().cov, kf.p)});
    }
  }
  return {worst <= 1e-12, fmt("100 runs x 50 steps, max relative error %.3g (limit 1e-12)", worst)};
}

// A3 / A4 -----------------------------------------------------------------

Outcome consistency_and_gain(const rpkf::ModelProvider& provider, std::uint64_t seed) {
  constexpr std::size_t kRuns = 500;
  constexpr std::size_t kHorizon = 300;
  const rpkf::Experiment exp{provider, rt::simulation_initial(), kHorizon, {}};
  const auto filtered = rpkf::monte_carlo(exp, kRuns, seed);

  const auto naive = rpkf::naive_provider(provider);
  const rpkf::Estimator naive_kf = [&](const rpkf::TruthTrajectory& t) {
    return rpkf::run_filter_on(t, naive, exp.initial).estimates;
  };
  const auto baseline = rpkf::monte_carlo(exp, kRuns, seed, naive_kf);

  const boost::math::chi_squared chi2(2.0 * kRuns);
  const double lo = boost::math::quantile(chi2, 0.005) / kRuns;
  const double hi = boost::math::quantile(chi2, 0.995) / kRuns;
  const double nees = mean_over(filtered.per_step_nees, 50, kHorizon);
  const double err = mean_over(filtered.per_step_sq_error, 50, kHorizon);
  const double err_naive = mean_over(baseline.per_step_sq_error, 50, kHorizon);
  const bool in_band = nees >= lo && nees <= hi;
  return {in_band && err <= err_naive,
          fmt("mean NEES %.4f in [%.4f, %.4f]: %s; mean E_k2 %.4f vs naive KF %.4f: %s", nees, lo,
              hi, in_band ? "yes" : "no", err, err_naive, err <= err_naive ? "yes" : "no")};
}

// A5 ----------------------------------------------------------------------

Outcome gamma_monotonicity() {
  const auto family = [](double g) {
    return rpkf::make_provider(rt::simulation1_model(g), &rpkf::build_nahi);
  };
  const auto points =
      rpkf::gamma_sweep(family, rt::simulation_initial(), {0.5, 0.7, 0.9, 0.95, 1.0}, 300);
  bool decreasing = true;
  std::string traces;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (i > 0 && !(points[i].trace_cov < points[i - 1].trace_cov)) decreasing = false;
    traces += fmt("%s%.4g", i ? ", " : "", points[i].trace_cov);
  }
  return {decreasing, "trace(P_300) = " + traces};
}

// A6 ----------------------------------------------------------------------

Outcome converted_noise_whiteness() {
  constexpr std::size_t kTrajectories = 100000;
  constexpr std::size_t kHorizon = 3;
  std::mt19937_64 gen(606);
  const MatrixDist f_dist = rt::random_dist(2, 2, 3, gen, 0.8);
  const MatrixDist h_dist = rt::random_dist(2, 2, 2, gen);
  const Matrix rv = rt::random_spd(2, gen);
  const Matrix rw = rt::random_spd(2, gen);
  const rpkf::InitialCondition ic{(Vector(2) << 1.0, -0.5).finished(), rt::random_spd(2, gen)};
  const rpkf::UncertainObsModel model{h_dist, {}, rw, rpkf::moments_from_dist(f_dist), rv};
  const auto provider = rpkf::make_provider(model, &rpkf::build_uncertain_obs);

  // Closed forms from the finite distributions directly.
  const auto spread = [](const MatrixDist& d, const Matrix& x) {
    const Matrix mean = d.mean();
    Matrix out = Matrix::Zero(d.rows(), d.rows());
    for (const auto& s : d.samples()) out += s.probability * (s.value - mean) * x * (s.value - mean).transpose();
    return out;
  };
  std::vector<Matrix> x_moment{ic.mean * ic.mean.transpose() + ic.cov};
  for (std::size_t k = 0; k < kHorizon; ++k) {
    Matrix next = rv;
    for (const auto& s : f_dist.samples()) next += s.probability * s.value * x_moment.back() * s.value.transpose();
    x_moment.push_back(next);
  }

  // Index layout: nu_0..nu_{K-1}, omega_1..omega_K.
  std::vector<rt::MomentAccumulator> nu_nu, om_om, nu_om, x0_nu, x0_om, nu_mean, om_mean;
  const std::size_t kk = kHorizon;
  for (std::size_t i = 0; i < kk * kk; ++i) {
    nu_nu.emplace_back(2, 2);
    om_om.emplace_back(2, 2);
    nu_om.emplace_back(2, 2);
  }
  for (std::size_t i = 0; i < kk; ++i) {
    x0_nu.emplace_back(2, 2);
    x0_om.emplace_back(2, 2);
    nu_mean.emplace_back(2, 1);
    om_mean.emplace_back(2, 1);
  }
  for (std::size_t t = 0; t < kTrajectories; ++t) {
    const auto traj = rpkf::simulate_truth(provider, ic, kHorizon, rpkf::derive_seed(606, t));
    const auto noise = rpkf::converted_noises(traj, provider);
    const Vector& x0 = traj.states.front();
    for (std::size_t k = 0; k < kk; ++k) {
      nu_mean[k].add(noise.process[k]);
      om_mean[k].add(noise.measurement[k]);
      x0_nu[k].add(x0 * noise.process[k].transpose());
      x0_om[k].add(x0 * noise.measurement[k].transpose());
      for (std::size_t l = 0; l < kk; ++l) {
        nu_nu[k * kk + l].add(noise.process[k] * noise.process[l].transpose());
        om_om[k * kk + l].add(noise.measurement[k] * noise.measurement[l].transpose());
        nu_om[k * kk + l].add(noise.process[k] * noise.measurement[l].transpose());
      }
    }
  }

  double worst_cross = 0.0;
  double worst_diag = 0.0;
  const Matrix zero = Matrix::Zero(2, 2);
  for (std::size_t k = 0; k < kk; ++k) {
    worst_cross = std::max({worst_cross, nu_mean[k].max_z(Vector::Zero(2)),
                            om_mean[k].max_z(Vector::Zero(2)), x0_nu[k].max_z(zero),
                            x0_om[k].max_z(zero)});
    for (std::size_t l = 0; l < kk; ++l) {
      // nu_k and omega_{l+1}: k differs from l + 1 except on the diagonal
      // k = l + 1; all of these vanish, so every pair is checked.
      worst_cross = std::max(worst_cross, nu_om[k * kk + l].max_z(zero));
      if (k == l) continue;
      worst_cross = std::max({worst_cross, nu_nu[k * kk + l].max_z(zero), om_om[k * kk + l].max_z(zero)});
    }
    // nu_k = x_{k+1} - F̄ x_k uses X_k; omega_{k+1} uses X_{k+1}.
    worst_diag = std::max({worst_diag, nu_nu[k * kk + k].max_z(rv + spread(f_dist, x_moment[k])),
                           om_om[k * kk + k].max_z(rw + spread(h_dist, x_moment[k + 1]))});
  }
  const bool pass = worst_cross <= 5.0 && worst_diag <= 5.0;
  return {pass, fmt("1e5 trajectories, K = 3: cross moments max %.2f SE, same-step moments max %.2f SE "
                    "(limit 5)",
                    worst_cross, worst_diag)};
}

// A7 ----------------------------------------------------------------------

Outcome partitioned_structure() {
  std::mt19937_64 gen(707);
  std::uniform_int_distribution<int> blocks(1, 5);
  std::uniform_int_distribution<int> rows(1, 3);
  std::uniform_int_distribution<int> dim(1, 3);
  std::uniform_real_distribution<double> prob(0.0, 1.0);
  double worst_off = 0.0;
  double worst_block = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int r = dim(gen);
    rpkf::PartitionedObsModel m;
    Eigen::Index n = 0;
    for (int b = blocks(gen); b > 0; --b) {
      m.blocks.push_back({rt::random_matrix(rows(gen), r, gen), prob(gen)});
      n += m.blocks.back().h.rows();
    }
    m.transition = Matrix::Identity(r, r);
    m.process_noise = Matrix::Identity(r, r);
    m.measurement_noise = Matrix::Identity(n, n);
    const Matrix x = rt::random_spd(r, gen);
    const Matrix q = rpkf::quad_form(rpkf::build_partitioned(m, 1).measurement, x);

    Eigen::Index row = 0;
    for (const auto& bi : m.blocks) {
      Eigen::Index col = 0;
      for (const auto& bj : m.blocks) {
        const auto sub = q.block(row, col, bi.h.rows(), bj.h.rows());
        if (&bi == &bj) {
          const Matrix expected = (1.0 - bi.p) * bi.p * bi.h * x * bi.h.transpose();
          worst_block = std::max(worst_block, rt::max_abs(sub - expected));
        } else {
          worst_off = std::max(worst_off, rt::max_abs(sub));
        }
        col += bj.h.rows();
      }
      row += bi.h.rows();
    }
  }
  return {worst_off < 1e-12 && worst_block < 1e-12,
          fmt("50 configurations, off-diagonal max %.3g, diagonal block error max %.3g (limit 1e-12)",
              worst_off, worst_block)};
}

// A8 ----------------------------------------------------------------------

Outcome nahi_specialization() {
  std::mt19937_64 gen(808);
  std::uniform_real_distribution<double> prob(0.05, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int r = trial < 50 ? 1 : 2;
    const double p = prob(gen);
    const rpkf::NahiModel model{rt::random_matrix(r, r, gen), rpkf::constant_probability(p),
                                rt::random_stable(r, gen), rt::random_spd(r, gen),
                                rt::random_spd(r, gen)};
    const auto provider = rpkf::make_provider(model, &rpkf::build_nahi);
    const rpkf::InitialCondition ic{rt::random_vector(r, gen, -3, 3), rt::random_spd(r, gen)};
    const auto traj = rpkf::simulate_truth(provider, ic, 30, gen());

    rpkf::RandomParameterFilter filter(provider, ic);
    rt::SpecializedNahi ref(ic.mean, ic.cov);
    for (const auto& y : traj.measurements) {
      filter.step(y);
      ref.step(model.transition, model.process_noise, model.h, model.measurement_noise, p, y);
      worst = std::max({worst, rpkf::linalg::relative_error(filter.state().mean, ref.x),
                        rpkf::linalg::relative_error(filter.state().cov, ref.p)});
    }
  }
  return {worst <= 1e-12,
          fmt("50 scalar + 50 two-state instances x 30 steps, max relative error %.3g (limit 1e-12)",
              worst)};
}

// A9 ----------------------------------------------------------------------

int tool(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(RPKF_TOOL_PATH) + " " + args + " >> " + log.string() + " 2>&1";
  return std::system(cmd.c_str());
}

Outcome cli_round_trip() {
  namespace cli = rpkf::cli;
  const fs::path root = fs::temp_directory_path() / "rpkf_acceptance_cli";
  fs::remove_all(root);
  fs::create_directories(root);
  const fs::path log = root / "log.txt";
  const fs::path configs = RPKF_CONFIG_DIR;
  const std::string sim1 = (configs / "simulation1.yaml").string();
  const std::string sim2 = (configs / "simulation2.yaml").string();

  std::string failures;
  const auto expect_ok = [&](const std::string& args) {
    if (tool(args, log) != 0) failures += "[" + args + "] ";
  };
  expect_ok("simulate --config " + sim1 + " --seed 77 --out " + (root / "sim").string());
  expect_ok("filter --config " + sim1 + " --measurements " + (root / "sim" / cli::kMeasurementsFile).string() +
            " --out " + (root / "filt").string());
  expect_ok("montecarlo --config " + sim1 + " --seed 77 --runs 1 --out " + (root / "mc").string());
  if (!failures.empty()) return {false, "command failed: " + failures};

  // Score the filtered estimates against the simulated truth and compare
  // with the single-run metrics cell by cell.
  const auto truth = cli::read_csv(root / "sim" / cli::kTruthFile);
  const auto est = cli::read_csv(root / "filt" / cli::kEstimatesFile);
  const auto metrics = cli::read_csv(root / "mc" / cli::kMetricsFile);
  const std::size_t r = truth.header.size() - 1;
  if (est.rows.size() != metrics.rows.size() || truth.rows.size() != est.rows.size() + 1) {
    return {false, "row counts differ"};
  }
  std::size_t mismatches = 0;
  for (std::size_t k = 0; k < est.rows.size(); ++k) {
    Vector x(r), xhat(r);
    Matrix p(r, r);
    std::size_t c = 1 + r;
    for (std::size_t i = 0; i < r; ++i) {
      x(i) = cli::parse_double(truth.rows[k + 1][1 + i]);
      xhat(i) = cli::parse_double(est.rows[k][1 + i]);
      for (std::size_t j = i; j < r; ++j) p(i, j) = p(j, i) = cli::parse_double(est.rows[k][c++]);
    }
    if (cli::format_double(rpkf::squared_error(xhat, x)) != metrics.rows[k][1]) ++mismatches;
    if (cli::format_double(rpkf::nees(xhat, p, x)) != metrics.rows[k][2]) ++mismatches;
  }

  expect_ok("montecarlo --config " + sim1 + " --out " + (root / "sim1_mc").string());
  expect_ok("sweep --config " + sim1 + " --out " + (root / "sim1_sweep").string());
  expect_ok("montecarlo --config " + sim2 + " --out " + (root / "sim2_mc").string());
  expect_ok("simulate --config " + sim2 + " --out " + (root / "sim2_sim").string());
  expect_ok("filter --config " + sim2 + " --measurements " +
            (root / "sim2_sim" / cli::kMeasurementsFile).string() + " --out " +
            (root / "sim2_filt").string());
  return {mismatches == 0 && failures.empty(),
          fmt("%zu of %zu metric cells differ; bundled configs %s", mismatches, 2 * est.rows.size(),
              failures.empty() ? "ran end to end" : ("failed: " + failures).c_str())};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"A1", "oracle equivalence", 30.0, oracle_equivalence},
      {"A2", "standard KF reduction", 10.0, standard_reduction},
      {"A3", "simulation 1 consistency",
       120.0, [] { return consistency_and_gain(rpkf::make_provider(rt::simulation1_model(), &rpkf::build_nahi), 20070101); }},
      {"A4", "simulation 2 consistency",
       120.0, [] { return consistency_and_gain(rpkf::make_provider(rt::simulation2_model(), &rpkf::build_multimodel), 20070102); }},
      {"A5", "gamma monotonicity", 1.0, gamma_monotonicity},
      {"A6", "converted noise whiteness", 60.0, converted_noise_whiteness},
      {"A7", "partitioned block structure", 5.0, partitioned_structure},
      {"A8", "dropout specialization", 5.0, nahi_specialization},
      {"A9", "CLI round trip", 10.0, cli_round_trip},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.check();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = seconds <= c.budget_s;
    const bool pass = out.pass && in_time;
    failed += !pass;
    std::printf("%s %s: %s | %s | %.2f s (budget %.0f s)%s\n", c.id, pass ? "PASS" : "FAIL", c.title,
                out.detail.c_str(), seconds, c.budget_s, in_time ? "" : " over budget");
    std::fflush(stdout);
  }
  return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
