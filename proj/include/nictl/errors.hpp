#pragma once

#include <stdexcept>
#include <string>

namespace nictl {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument violates a documented precondition (invalid parameter, improper TF, ...).
class PreconditionViolation : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public PreconditionViolation {
 public:
  using PreconditionViolation::PreconditionViolation;
};

/// The serial cascade requires k_h2 == k_h3 and omega_h2 < omega_h3.
class CascadeAssumptionViolated : public PreconditionViolation {
 public:
  using PreconditionViolation::PreconditionViolation;
};

/// j*omega lies on (or within tolerance of) a pole.
class SingularAtFrequency : public Error {
 public:
  explicit SingularAtFrequency(double omega)
      : Error("frequency response is singular at omega = " + std::to_string(omega)),
        omega_(omega) {}
  double omega() const { return omega_; }

 private:
  double omega_;
};

class SingularA : public Error {
 public:
  SingularA() : Error("state matrix A is singular") {}
};

class IllPosedLoop : public Error {
 public:
  using Error::Error;
};

class UnsolvableLoop : public Error {
 public:
  using Error::Error;
};

/// Divergence guard tripped during simulation.
class NonFiniteState : public Error {
 public:
  explicit NonFiniteState(double t)
      : Error("state left the finite range at t = " + std::to_string(t)), time_(t) {}
  double time() const { return time_; }

 private:
  double time_;
};

class CertificateNotPD : public Error {
 public:
  CertificateNotPD(std::string stage, const std::string& what)
      : Error(what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

class NotNI : public Error {
 public:
  using Error::Error;
};

}  // namespace nictl
