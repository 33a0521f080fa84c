#include "mhsplit/serialize.hpp"

#include <charconv>
#include <cmath>

namespace mhsplit {
namespace {

const json& require(const json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("missing key: ") + key);
  return j.at(key);
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

json vector_to_json(const VectorXd& v) {
  json j = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v[i]);
  return j;
}

VectorXd vector_from_json(const json& j) {
  if (!j.is_array()) throw ConfigError("expected a numeric array");
  VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[i] = j[i].get<double>();
  return v;
}

json matrix_to_json(const MatrixXd& m) {
  json j = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) j.push_back(vector_to_json(m.row(r).transpose()));
  return j;
}

MatrixXd matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw ConfigError("expected a nested numeric array");
  const std::size_t rows = j.size();
  const std::size_t cols = j[0].size();
  MatrixXd m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (j[r].size() != cols) throw ConfigError("ragged matrix");
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

json target_to_json(const GaussianTarget& target, std::optional<std::uint64_t> q_seed) {
  json j;
  j["dim"] = target.dim();
  j["eigenvalues"] = vector_to_json(target.spectrum().eigenvalues());
  if (q_seed) j["q_seed"] = *q_seed;
  else if (!target.spectrum().identity_basis()) j["Q"] = matrix_to_json(target.spectrum().basis());
  j["b"] = vector_to_json(target.shift());
  return j;
}

GaussianTarget target_from_json(const json& j) {
  const int d = require(j, "dim").get<int>();
  VectorXd ev = vector_from_json(require(j, "eigenvalues"));
  if (ev.size() != d) throw ConfigError("eigenvalues length differs from dim");
  MatrixXd q;
  if (j.contains("q_seed")) q = random_orthogonal(d, j.at("q_seed").get<std::uint64_t>());
  else if (j.contains("Q")) q = matrix_from_json(j.at("Q"));
  else q = MatrixXd::Identity(d, d);
  VectorXd b = j.contains("b") ? vector_from_json(j.at("b")) : VectorXd::Zero(d);
  auto spectrum = std::make_shared<SpdSpectrum>(SpdSpectrum::from_parts(std::move(ev), q));
  return GaussianTarget(std::move(spectrum), std::move(b));
}

json proposal_to_json(const Ar1Proposal& p) {
  json j;
  j["kind"] = "ar1";
  if (p.has_spectral_form()) {
    const auto& s = p.spectral_form();
    j["spectral_form"] = {{"G_i", vector_to_json(s.G)},
                          {"Sigma_i", vector_to_json(s.Sigma)},
                          {"g", vector_to_json(s.g)}};
  } else {
    j["G"] = matrix_to_json(p.G());
    j["g"] = vector_to_json(p.g());
    j["Sigma"] = matrix_to_json(p.Sigma());
  }
  return j;
}

Ar1Proposal proposal_from_json(const json& j, const SpectrumPtr& basis) {
  if (require(j, "kind").get<std::string>() != "ar1") throw ConfigError("expected kind \"ar1\"");
  if (j.contains("spectral_form")) {
    if (!basis) throw ConfigError("spectral_form proposal needs a target basis");
    const json& s = j.at("spectral_form");
    return Ar1Proposal::spectral(basis, vector_from_json(require(s, "G_i")),
                                 vector_from_json(require(s, "g")),
                                 vector_from_json(require(s, "Sigma_i")));
  }
  return Ar1Proposal::dense(matrix_from_json(require(j, "G")), vector_from_json(require(j, "g")),
                            matrix_from_json(require(j, "Sigma")));
}

json splitting_to_json(const MatrixSplitting& s) {
  json j;
  j["kind"] = "splitting";
  if (s.has_spectral_form()) {
    const auto& sp = s.spectral_form();
    j["spectral_form"] = {{"M_i", vector_to_json(sp.M)},
                          {"N_i", vector_to_json(sp.N)},
                          {"beta", vector_to_json(sp.beta)},
                          {"calA_i", vector_to_json(sp.calA)}};
  } else {
    j["M"] = matrix_to_json(s.M());
    j["N"] = matrix_to_json(s.N());
    j["beta"] = vector_to_json(s.beta());
  }
  return j;
}

MatrixSplitting splitting_from_json(const json& j, const SpectrumPtr& basis) {
  if (require(j, "kind").get<std::string>() != "splitting")
    throw ConfigError("expected kind \"splitting\"");
  if (j.contains("spectral_form")) {
    if (!basis) throw ConfigError("spectral_form splitting needs a target basis");
    const json& s = j.at("spectral_form");
    return MatrixSplitting::spectral(basis, vector_from_json(require(s, "M_i")),
                                     vector_from_json(require(s, "N_i")),
                                     vector_from_json(require(s, "beta")),
                                     vector_from_json(require(s, "calA_i")));
  }
  return MatrixSplitting::dense(matrix_from_json(require(j, "M")), matrix_from_json(require(j, "N")),
                                vector_from_json(require(j, "beta")));
}

json diagnostics_to_json(const ChainDiagnostics& d) {
  json j;
  j["n_steps"] = d.n_steps;
  j["burn_in"] = d.burn_in;
  j["kept"] = d.kept;
  j["accepted"] = d.accepted;
  j["acceptance_rate"] = d.acceptance_rate;
  j["acceptance_stderr"] = d.acceptance_stderr;
  j["jump_sq"] = vector_to_json(d.jump_sq);
  j["jump_sq_stderr"] = vector_to_json(d.jump_sq_stderr);
  j["mean_jump_sq"] = d.mean_jump_sq;
  j["mean_jump_sq_stderr"] = d.mean_jump_sq_stderr;
  j["lag1_corr"] = vector_to_json(d.lag1_corr);
  j["z_mean"] = d.z_mean;
  j["z_var"] = d.z_var;
  j["sample_mean"] = vector_to_json(d.sample_mean);
  j["sample_cov_diag"] = vector_to_json(d.sample_cov_diag);
  j["wall_time_s"] = d.wall_time_s;
  j["matvec_count"] = d.matvec_count;
  return j;
}

}  // namespace mhsplit
