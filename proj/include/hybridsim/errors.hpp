#pragma once

#include <stdexcept>
#include <string>

namespace hybridsim {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ShapeMismatch : Error {
  using Error::Error;
};
struct NonHermitianInput : Error {
  using Error::Error;
};
struct ZeroProbability : Error {
  using Error::Error;
};
struct NonFinite : Error {
  using Error::Error;
};
struct OddDimension : Error {
  using Error::Error;
};
struct ZeroTotalRate : Error {
  using Error::Error;
};
struct CflViolation : Error {
  using Error::Error;
};
struct BoundaryUnderflow : Error {
  using Error::Error;
};
struct UnsupportedXDependence : Error {
  using Error::Error;
};
struct RankDeficiency : Error {
  using Error::Error;
};
struct MonitoringInfeasible : Error {
  using Error::Error;
};
struct InadmissibleModel : Error {
  using Error::Error;
};
struct IoError : Error {
  using Error::Error;
};

// Requested dxi.dxi correlation cannot coexist with (DQ, DC, G) as a joint
// Gaussian; carries the most negative 2x2 principal minor as a witness.
struct InfeasibleNoiseChoice : Error {
  InfeasibleNoiseChoice(const std::string& msg, double min_eigenvalue,
                        int minor_i, int minor_j, double minor_det)
      : Error(msg),
        min_eig(min_eigenvalue),
        minor_row(minor_i),
        minor_col(minor_j),
        minor_determinant(minor_det) {}
  double min_eig;
  int minor_row;
  int minor_col;
  double minor_determinant;
};

}  // namespace hybridsim
