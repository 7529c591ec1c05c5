#include "mechsq/design.hpp"

#include <catch_amalgamated.hpp>

#include <random>

using namespace mechsq;
using Catch::Approx;

namespace {

SystemParams rates_only(double g, double kappa, double gamma) {
  SystemParams p;
  p.delta = 1.0;
  p.omega = 1.0;
  p.g = g;
  p.kappa = kappa;
  p.gamma_disp = gamma;
  return p;
}

// Dense logarithmic scan of the objective over [Ω, 1e6 Ω].
double grid_minimizer(const std::function<double(double)>& f) {
  double best = 1, best_v = f(1);
  const int n = 200000;
  for (int k = 0; k <= n; ++k) {
    const double d = std::pow(10.0, 6.0 * k / n);
    const double v = f(d);
    if (v < best_v) {
      best_v = v;
      best = d;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("trap frequency and cavity decay for the nanosphere") {
  const auto d = derive_rates(PhysicalSetup{});
  CHECK(d.omega / (2 * std::numbers::pi) == Approx(100e3).epsilon(0.25));
  CHECK(d.omega / (2 * std::numbers::pi) == Approx(101.6e3).epsilon(1e-3));
  CHECK(d.kappa == Approx(31394192.78848088796).epsilon(1e-12));
  CHECK(d.kappa == Approx(3.14e7).epsilon(1e-3));
  CHECK(d.mass == Approx(2200 * 4.0 / 3.0 * std::numbers::pi * 1e-21).epsilon(1e-14));
  CHECK(d.g > 0);
  CHECK(d.gamma_disp > 0);
}

TEST_CASE("scaling laws") {
  PhysicalSetup s;
  const auto base = derive_rates(s);
  auto half = s;
  half.L_c = s.L_c / 2;
  const auto h = derive_rates(half);
  CHECK(h.g / base.g == Approx(2.0).epsilon(1e-12));
  CHECK(h.gamma_disp == Approx(base.gamma_disp).epsilon(1e-14));
  CHECK(h.omega == Approx(base.omega).epsilon(1e-14));

  auto quad_power = s;
  quad_power.P_t = 4 * s.P_t;
  const auto q = derive_rates(quad_power);
  CHECK(q.omega / base.omega == Approx(2.0).epsilon(1e-12));
  CHECK(q.g / base.g == Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(q.gamma_disp / base.gamma_disp == Approx(2.0).epsilon(1e-12));

  auto big = s;
  big.R = 2 * s.R;
  CHECK(derive_rates(big).g / base.g == Approx(std::pow(2.0, 1.5)).epsilon(1e-12));
  CHECK(derive_rates(big).gamma_disp / base.gamma_disp == Approx(8.0).epsilon(1e-12));
}

TEST_CASE("instability ratio at the optimum does not depend on tweezers power") {
  auto ratio = [](double power) {
    PhysicalSetup s;
    s.P_t = power;
    const auto d = derive_rates(s);
    return instability_ratio(to_system_params(d, optimal_detuning_approx(d)));
  };
  const double ref = ratio(29e-3);
  for (double p : {1e-3, 10e-3, 100e-3, 1.0}) CHECK(ratio(p) == Approx(ref).epsilon(1e-6));
}

TEST_CASE("ratio at the optimum scales as L_c^-1/2") {
  auto ratio = [](double L) {
    PhysicalSetup s;
    s.L_c = L;
    const auto d = derive_rates(s);
    return instability_ratio(to_system_params(d, optimal_detuning_approx(d)));
  };
  CHECK(ratio(100e-6) / ratio(400e-6) == Approx(2.0).epsilon(1e-10));
}

TEST_CASE("rates do not depend on the unit prefixes used to state the setup") {
  // Restate the setup in µm/mW/g-per-cm³, convert back, and compare.
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.5, 2.0);
  for (int k = 0; k < 50; ++k) {
    PhysicalSetup si;
    si.P_t *= u(rng);
    si.W_t *= u(rng);
    si.R *= u(rng);
    si.L_c *= u(rng);
    si.finesse *= u(rng);
    const double pt_mw = si.P_t * 1e3, wt_um = si.W_t * 1e6, r_nm = si.R * 1e9, l_um = si.L_c * 1e6,
                 lam_nm = si.lambda_t * 1e9, rho_gcc = si.rho_mass * 1e-3;
    PhysicalSetup back = si;
    back.P_t = pt_mw * 1e-3;
    back.W_t = wt_um * 1e-6;
    back.R = r_nm * 1e-9;
    back.L_c = l_um * 1e-6;
    back.lambda_t = back.lambda_c = lam_nm * 1e-9;
    back.rho_mass = rho_gcc * 1e3;
    const auto a = derive_rates(si), b = derive_rates(back);
    CHECK(b.omega == Approx(a.omega).epsilon(1e-12));
    CHECK(b.g == Approx(a.g).epsilon(1e-12));
    CHECK(b.kappa == Approx(a.kappa).epsilon(1e-12));
    CHECK(b.gamma_disp == Approx(a.gamma_disp).epsilon(1e-12));
  }
}

TEST_CASE("setup validation") {
  PhysicalSetup s;
  s.A_x = 1.2;
  CHECK_THROWS_AS(derive_rates(s), ConfigError);
  s = {};
  s.R = 2e-6;
  CHECK_THROWS_AS(derive_rates(s), ConfigError);
  s = {};
  s.finesse = 0;
  CHECK_THROWS_AS(derive_rates(s), ConfigError);
}

TEST_CASE("approximate optimal detuning") {
  CHECK(optimal_detuning_approx(rates_only(100, 1, 0.01)) == Approx(577.3502691896257645).epsilon(1e-14));
  CHECK(optimal_detuning_approx(rates_only(100, 1, 0.04)) ==
        Approx(optimal_detuning_approx(rates_only(100, 1, 0.01)) / 2));
  CHECK_THROWS_AS(optimal_detuning_approx(rates_only(100, 1, 0.0)), RegimeError);
}

TEST_CASE("exact optimal detuning, dissipative objective") {
  const auto p = rates_only(100, 1, 0.01);
  const auto opt = optimal_detuning_exact(p);
  const double scan = grid_minimizer([&](double d) { return dissipative_variance(d, 1, 100, 1, 0.01); });
  CHECK(opt.delta == Approx(scan).epsilon(1e-4));
  // The approximation drops the −Ω/(2Δ²) slope term, which dominates here
  // (8g/(κ√(Δ/Ω)) ≈ 33); the true minimizer sits 4.16× higher.
  CHECK(opt.delta == Approx(2402.8039678574).epsilon(1e-6));
  CHECK(opt.approx == Approx(577.3502691896257645));
  CHECK_FALSE(opt.at_lower_bound);
  CHECK_FALSE(opt.at_upper_bound);
  CHECK(opt.variance <= dissipative_variance(opt.approx, 1, 100, 1, 0.01));

  const auto mono = optimal_detuning_exact(rates_only(100, 1, 0.0));
  CHECK(mono.at_upper_bound);
  CHECK(std::isnan(mono.approx));
}

TEST_CASE("exact optimum is never worse than the approximation") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int k = 0; k < 300; ++k) {
    const auto p = rates_only(std::pow(10, u(rng) + 1), std::pow(10, u(rng)), std::pow(10, u(rng) - 3));
    const auto opt = optimal_detuning_exact(p);
    const double approx = std::clamp(opt.approx, 1.0, 1e6);
    CHECK(opt.variance <= dissipative_variance(approx, 1, p.g, p.kappa, p.gamma_disp) * (1 + 1e-12));
  }
}

TEST_CASE("exact optimal detuning, thermal objective") {
  const auto p = rates_only(1, 10, 0);
  const ThermalBathParams th{0.01, 1.0};
  const auto opt = optimal_detuning_exact(p, Objective::Thermal, th);
  const double scan = grid_minimizer([&](double d) { return thermal_variance(d, 1, 1, 10, 0.01); });
  CHECK(opt.delta == Approx(scan).epsilon(1e-4));
  CHECK(opt.approx == Approx(500.0));
  CHECK(opt.delta == Approx(500.0).epsilon(0.1));
}

TEST_CASE("exact vs approximate optimum across the cavity-length range, frozen ratios") {
  const std::pair<double, double> rows[] = {{10e-6, 1.007}, {100e-6, 1.037}, {300e-6, 1.08}, {1e-3, 1.18}, {3e-3, 1.36}};
  for (const auto& [L, ratio] : rows) {
    PhysicalSetup s;
    s.L_c = L;
    const auto d = derive_rates(s);
    const double approx = optimal_detuning_approx(d);
    const double exact = optimal_detuning_exact(to_system_params(d, approx)).delta * d.omega;
    INFO("L_c = " << L);
    CHECK(exact / approx == Approx(ratio).epsilon(0.01));
  }
}

TEST_CASE("stability map") {
  const auto cells = stability_map({0.01, 0.25}, {0.01, 0.2});
  REQUIRE(cells.size() == 4);
  const auto& ref = cells[1];  // (0.01, 0.2)
  CHECK(ref.unstable);
  CHECK(ref.timescale == Approx(25.84050576660991605).epsilon(1e-12));
  CHECK(ref.timescale_approx == Approx(25.0));
  CHECK_FALSE(cells[0].unstable);
  CHECK(std::isnan(cells[0].timescale));
  CHECK_FALSE(cells[2].unstable);

  // Δ/r diverges towards the border 4g² = ΔΩ.
  double prev = 0;
  for (double eps : {1e-1, 1e-2, 1e-3, 1e-4}) {
    const double g = 0.5 * std::sqrt(0.01) * (1 + eps);
    const double ts = stability_map({0.01}, {g})[0].timescale;
    CHECK(ts > prev);
    prev = ts;
  }
  CHECK(prev > 1e3);
}

TEST_CASE("squeezing map landmarks") {
  const std::vector<double> kappas{0.01, 0.1, 1, 10};
  const std::vector<double> gammas{1e-6, 1e-5, 1e-4, 1e-3};
  const auto strong = squeezing_map(kappas, gammas, 100);
  double best = -1e9;
  for (const auto& c : strong) best = std::max(best, c.s_db);
  CHECK(best > 30);
  const auto weak = squeezing_map({0.01, 0.1}, {1e-3, 5e-3}, 1);
  bool above3 = false;
  for (const auto& c : weak) above3 = above3 || c.s_db > 3;
  CHECK(above3);
  bool kappa10 = false;
  for (const auto& c : strong)
    if (c.kappa == 10 && c.s_db > 0) kappa10 = true;
  CHECK(kappa10);
  // Monotone along both axes.
  for (std::size_t i = 0; i < kappas.size(); ++i)
    for (std::size_t j = 0; j < gammas.size(); ++j) {
      const double v = strong[i * gammas.size() + j].s_db;
      if (i + 1 < kappas.size()) CHECK(strong[(i + 1) * gammas.size() + j].s_db <= v + 1e-9);
      if (j + 1 < gammas.size()) CHECK(strong[i * gammas.size() + j + 1].s_db <= v + 1e-9);
    }
}

TEST_CASE("feasibility sweep") {
  const auto rows = feasibility_sweep(PhysicalSetup{}, {100e-6, 300e-6, 1e-2}, {0, 100});
  REQUIRE(rows.size() == 3);
  for (const auto& row : rows) CHECK(row.error.empty());
  for (int k = 0; k < 2; ++k) {
    const auto& row = rows[static_cast<std::size_t>(k)];
    CHECK(row.unstable);
    for (const auto& pt : row.points) {
      CHECK(pt.error.empty());
      CHECK(pt.s_db > 10);
      CHECK(std::abs(pt.s_db - row.s_dissipative) < 1.0);
      CHECK(pt.t_star > 1.0 / row.r);
    }
    CHECK(row.points[0].t_star > row.points[1].t_star);
  }
  CHECK_FALSE(rows[2].unstable);
  CHECK(std::isinf(rows[2].points[0].t_star));
  CHECK(rows[2].points[0].s_db < 0);
  // Rows match the frozen values of the sweep.
  CHECK(rows[0].points[0].s_db == Approx(18.0).margin(0.05));
  CHECK(rows[1].points[0].s_db == Approx(14.05).margin(0.01));
}
