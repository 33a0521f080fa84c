#include "doctest.h"
#include "oracles.hpp"

#include "mhsplit/serialize.hpp"
#include "mhsplit/verify.hpp"

using namespace mhsplit;

TEST_SUITE("serialize") {

TEST_CASE("doubles round trip through 17 digits") {
  Rng rng(1);
  for (int k = 0; k < 100; ++k) {
    const double v = oracle::normals(1, rng)[0] * std::pow(10.0, k % 40 - 20);
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(std::nan("")) == "nan");
  CHECK(format_double(-INFINITY) == "-inf");
}

TEST_CASE("target round trip with and without q_seed") {
  const GaussianTarget t = make_test_target(4, {0.5, 1.0}, 17, true, ShiftLaw::random);
  const GaussianTarget a = target_from_json(target_to_json(t, 17));
  CHECK((a.precision() - t.precision()).norm() < 1e-12);
  const GaussianTarget b = target_from_json(json::parse(target_to_json(t).dump()));
  CHECK((b.precision() - t.precision()).norm() < 1e-12);
  CHECK((b.shift() - t.shift()).norm() == 0.0);
  json j = target_to_json(make_test_target(3, {0.0, 2.0}, 1, false, ShiftLaw::zero));
  CHECK_FALSE(j.contains("Q"));
  CHECK((target_from_json(j).precision() - 4.0 * MatrixXd::Identity(3, 3)).norm() < 1e-12);
  j["eigenvalues"] = json::array({1.0, 2.0});
  CHECK_THROWS_AS(target_from_json(j), ConfigError);
}

TEST_CASE("proposal and splitting round trips") {
  Rng rng(2);
  const Ar1Proposal p = random_convergent_ar1(4, rng);
  const Ar1Proposal q = proposal_from_json(json::parse(proposal_to_json(p).dump()));
  CHECK((q.G() - p.G()).norm() == 0.0);
  CHECK((q.Sigma() - p.Sigma()).norm() == 0.0);
  const MatrixSplitting s = ar1_to_splitting(p);
  const MatrixSplitting r = splitting_from_json(json::parse(splitting_to_json(s).dump()));
  CHECK((r.M() - s.M()).norm() == 0.0);
  CHECK((r.beta() - s.beta()).norm() == 0.0);

  const GaussianTarget t = make_test_target(5, {0.5, 1.0}, 3, true, ShiftLaw::random);
  const BuiltProposal bp = sla_proposal(t, 0.2);
  const json pj = proposal_to_json(bp.proposal);
  CHECK(pj.contains("spectral_form"));
  CHECK_THROWS_AS(proposal_from_json(pj), ConfigError);
  const Ar1Proposal back = proposal_from_json(pj, t.spectrum_ptr());
  CHECK((back.G() - bp.proposal.G()).norm() < 1e-14);
  const MatrixSplitting sb = splitting_from_json(splitting_to_json(bp.splitting), t.spectrum_ptr());
  CHECK((sb.calA() - bp.splitting.calA()).norm() < 1e-14);
}

}
