#pragma once

// JSON mapping of the value types. Keys mirror the field names. Parsing is
// strict: unknown keys and wrongly typed values raise ConfigError naming the
// offending key path.

#include "mechsq/design.hpp"
#include "mechsq/errors.hpp"
#include "mechsq/model.hpp"
#include "mechsq/normalform.hpp"

#include <json.hpp>

#include <initializer_list>
#include <string>

namespace mechsq {

using json = nlohmann::json;

namespace detail {

/// Reads optional fields of `obj` and rejects any key not listed.
class FieldReader {
 public:
  FieldReader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError("config", path_ + ": expected an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.emplace_back(key);
    const auto it = obj_.find(key);
    if (it == obj_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError("config", path_ + "." + key + ": " + e.what());
    }
  }

  void get_number(const char* key, double& out) {
    seen_.emplace_back(key);
    const auto it = obj_.find(key);
    if (it == obj_.end()) return;
    if (!it->is_number()) throw ConfigError("config", path_ + "." + key + ": expected a number");
    out = it->get<double>();
  }

  bool has(const char* key) const { return obj_.contains(key); }

  void finish() const {
    for (const auto& [k, v] : obj_.items()) {
      bool known = false;
      for (const auto& s : seen_) known = known || s == k;
      if (!known) throw ConfigError("config", path_ + ": unknown key '" + k + "'");
    }
  }

 private:
  const json& obj_;
  std::string path_;
  std::vector<std::string> seen_;
};

}  // namespace detail

inline void to_json(json& j, const SystemParams& p) {
  j = json{{"delta", p.delta}, {"omega", p.omega}, {"g", p.g}, {"kappa", p.kappa},
           {"gamma_disp", p.gamma_disp}, {"unit_scale", p.unit_scale}};
}

inline void from_json(const json& j, SystemParams& p) {
  detail::FieldReader r(j, "params");
  r.get_number("delta", p.delta);
  r.get_number("omega", p.omega);
  r.get_number("g", p.g);
  r.get_number("kappa", p.kappa);
  r.get_number("gamma_disp", p.gamma_disp);
  r.get_number("unit_scale", p.unit_scale);
  r.finish();
}

inline void to_json(json& j, const ThermalBathParams& t) {
  j = json{{"gamma_thermal", t.gamma_thermal}, {"n_bar", t.n_bar}};
}

inline void from_json(const json& j, ThermalBathParams& t) {
  detail::FieldReader r(j, "thermal");
  r.get_number("gamma_thermal", t.gamma_thermal);
  r.get_number("n_bar", t.n_bar);
  r.finish();
}

inline void to_json(json& j, const InitialConditions& ic) {
  j = json{{"n_bar_b", ic.n_bar_b}, {"cavity_vacuum", ic.cavity_vacuum}};
}

inline void from_json(const json& j, InitialConditions& ic) {
  detail::FieldReader r(j, "initial");
  r.get_number("n_bar_b", ic.n_bar_b);
  r.get("cavity_vacuum", ic.cavity_vacuum);
  r.finish();
  if (!ic.cavity_vacuum) throw ConfigError("config", "initial.cavity_vacuum: only a vacuum cavity is supported");
}

inline void to_json(json& j, const GaussianState<double>& s) {
  j = json{{"mean", json::array()}, {"cov", json::array()}};
  for (int i = 0; i < 4; ++i) {
    j["mean"].push_back(s.mean(i));
    json row = json::array();
    for (int k = 0; k < 4; ++k) row.push_back(s.cov(i, k));
    j["cov"].push_back(row);
  }
}

inline void from_json(const json& j, GaussianState<double>& s) {
  detail::FieldReader r(j, "state");
  std::vector<double> mean;
  std::vector<std::vector<double>> cov;
  r.get("mean", mean);
  r.get("cov", cov);
  r.finish();
  if (mean.size() != 4 || cov.size() != 4) throw ConfigError("config", "state: mean must have 4 entries and cov 4 rows");
  for (int i = 0; i < 4; ++i) {
    if (cov[static_cast<std::size_t>(i)].size() != 4) throw ConfigError("config", "state: cov rows must have 4 entries");
    s.mean(i) = mean[static_cast<std::size_t>(i)];
    for (int k = 0; k < 4; ++k) s.cov(i, k) = cov[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
  }
}

inline void to_json(json& j, const PhysicalSetup& s) {
  j = json{{"P_t", s.P_t},         {"W_t", s.W_t}, {"A_x", s.A_x},
           {"A_y", s.A_y},         {"lambda_t", s.lambda_t}, {"lambda_c", s.lambda_c},
           {"R", s.R},             {"epsilon_rel", s.epsilon_rel}, {"rho_mass", s.rho_mass},
           {"L_c", s.L_c},         {"finesse", s.finesse}};
}

inline void from_json(const json& j, PhysicalSetup& s) {
  detail::FieldReader r(j, "setup");
  r.get_number("P_t", s.P_t);
  r.get_number("W_t", s.W_t);
  r.get_number("A_x", s.A_x);
  r.get_number("A_y", s.A_y);
  r.get_number("lambda_t", s.lambda_t);
  r.get_number("lambda_c", s.lambda_c);
  r.get_number("R", s.R);
  r.get_number("epsilon_rel", s.epsilon_rel);
  r.get_number("rho_mass", s.rho_mass);
  r.get_number("L_c", s.L_c);
  r.get_number("finesse", s.finesse);
  r.finish();
}

inline void to_json(json& j, const DerivedRates& d) {
  j = json{{"omega", d.omega}, {"g", d.g}, {"kappa", d.kappa}, {"gamma_disp", d.gamma_disp},
           {"mass", d.mass}, {"alpha", d.alpha}, {"W_c", d.W_c}};
}

inline json matrix_json(const Eigen::Matrix4d& m) {
  json out = json::array();
  for (int i = 0; i < 4; ++i) {
    json row = json::array();
    for (int k = 0; k < 4; ++k) row.push_back(m(i, k));
    out.push_back(row);
  }
  return out;
}

inline void to_json(json& j, const NormalForm& nf) {
  j = json{{"zeta", nf.zeta},         {"omega1", nf.omega1},   {"r", nf.r},
           {"a_plus", nf.a_plus},     {"a_minus", nf.a_minus}, {"b_plus", nf.b_plus},
           {"b_minus", nf.b_minus},   {"P24", nf.P24},         {"P", matrix_json(nf.P)},
           {"T_re", matrix_json(nf.T.real())}, {"T_im", matrix_json(nf.T.imag())}};
}

}  // namespace mechsq
