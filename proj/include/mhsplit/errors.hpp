#pragma once

#include <stdexcept>
#include <string>

namespace mhsplit {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument or configuration did not satisfy a documented precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class NotSpd : public Error {
 public:
  using Error::Error;
};

/// Iteration matrix has spectral radius too close to (or above) one.
class NonConvergent : public Error {
 public:
  NonConvergent(double radius, const std::string& what)
      : Error(what), radius_(radius) {}
  double radius() const noexcept { return radius_; }

 private:
  double radius_;
};

class SingularM : public Error {
 public:
  SingularM(double condition, const std::string& what)
      : Error(what), condition_(condition) {}
  double condition() const noexcept { return condition_; }

 private:
  double condition_;
};

class NotSymmetrizable : public Error {
 public:
  using Error::Error;
};

class NotSymmetric : public Error {
 public:
  using Error::Error;
};

/// Step size makes the proposal limit precision lose definiteness.
class StepTooLarge : public Error {
 public:
  StepTooLarge(double critical_h, const std::string& what)
      : Error(what), critical_h_(critical_h) {}
  double critical_h() const noexcept { return critical_h_; }

 private:
  double critical_h_;
};

/// Leapfrog step outside the stability interval for some mode.
class UnstableIntegrator : public Error {
 public:
  using Error::Error;
};

class DegenerateWeights : public Error {
 public:
  DegenerateWeights(double ess, const std::string& what)
      : Error(what), ess_(ess) {}
  double ess() const noexcept { return ess_; }

 private:
  double ess_;
};

/// Closed-form predictions need all proposal matrices to be functions of A.
class TheoryUnavailable : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace mhsplit
