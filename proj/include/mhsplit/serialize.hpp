#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "json.hpp"

#include "mhsplit/model.hpp"
#include "mhsplit/sampler.hpp"
#include "mhsplit/splitting.hpp"

namespace mhsplit {

using nlohmann::json;

/// Shortest-round-trip-safe decimal form with 17 significant digits, no locale.
std::string format_double(double v);

json vector_to_json(const VectorXd& v);
VectorXd vector_from_json(const json& j);
json matrix_to_json(const MatrixXd& m);
MatrixXd matrix_from_json(const json& j);

/// {dim, eigenvalues, q_seed | Q, b}. With q_seed the basis is not written.
json target_to_json(const GaussianTarget& target, std::optional<std::uint64_t> q_seed = {});
/// Rebuilds the target; a missing Q and q_seed means the identity basis.
GaussianTarget target_from_json(const json& j);

/// {kind: "ar1", G, g, Sigma} or {kind: "ar1", spectral_form: {G_i, Sigma_i, g}}.
json proposal_to_json(const Ar1Proposal& p);
/// Spectral forms are attached to `basis`, which must be supplied for them.
Ar1Proposal proposal_from_json(const json& j, const SpectrumPtr& basis = nullptr);

/// {kind: "splitting", M, N, beta} or {kind: "splitting", spectral_form: {M_i, N_i, beta, calA_i}}.
json splitting_to_json(const MatrixSplitting& s);
MatrixSplitting splitting_from_json(const json& j, const SpectrumPtr& basis = nullptr);

json diagnostics_to_json(const ChainDiagnostics& d);

}  // namespace mhsplit
