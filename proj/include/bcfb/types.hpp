#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace bcfb {

using Real = double;
using Complex = std::complex<Real>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;

inline Real db_to_linear(Real db) { return std::pow(10.0, db / 10.0); }
inline Real linear_to_db(Real x) { return 10.0 * std::log10(x); }

// Beamforming geometry collapsed (a quantized direction lies in the span of
// the others). Probability zero under continuous channels; the Monte Carlo
// harness counts and excludes such blocks.
class DegenerateGeometryError : public std::runtime_error {
 public:
  explicit DegenerateGeometryError(int user)
      : std::runtime_error("degenerate beamforming geometry for user " + std::to_string(user)),
        user_(user) {}
  int user() const { return user_; }

 private:
  int user_;
};

struct UserProfile {
  Real gamma = 1.0;    // path loss coefficient (power gain)
  int rate_bits = 0;   // feedback rate per channel realization

  friend bool operator==(const UserProfile&, const UserProfile&) = default;
};

// Base station with `antennas` transmit antennas, total transmit SNR `rho`
// (linear scale, unit-variance noise), and one profile per single-antenna
// user. If antennas > users, the construction pads with gamma = 0 users,
// which is an equivalent system.
class SystemConfig {
 public:
  SystemConfig(int antennas, Real rho, std::vector<UserProfile> users)
      : antennas_(antennas), rho_(rho), users_(std::move(users)) {
    original_users_ = static_cast<int>(users_.size());
    if (antennas_ < 1) throw std::invalid_argument("antenna count must be >= 1");
    if (original_users_ < 1) throw std::invalid_argument("user count must be >= 1");
    if (!(rho_ >= 0.0) || !std::isfinite(rho_)) throw std::invalid_argument("rho must be finite and >= 0");
    for (const UserProfile& u : users_) {
      if (!(u.gamma >= 0.0) || !std::isfinite(u.gamma))
        throw std::invalid_argument("gamma must be finite and >= 0");
      if (u.rate_bits < 0) throw std::invalid_argument("rate_bits must be >= 0");
    }
    while (static_cast<int>(users_.size()) < antennas_) users_.push_back({0.0, 0});
  }

  static SystemConfig from_db(int antennas, Real rho_db, std::vector<UserProfile> users) {
    return SystemConfig(antennas, db_to_linear(rho_db), std::move(users));
  }

  int antennas() const { return antennas_; }
  int num_users() const { return static_cast<int>(users_.size()); }
  // User count before zero-gamma padding.
  int original_users() const { return original_users_; }
  Real rho() const { return rho_; }
  const std::vector<UserProfile>& users() const { return users_; }
  const UserProfile& user(int i) const { return users_.at(static_cast<std::size_t>(i)); }

 private:
  int antennas_;
  Real rho_;
  std::vector<UserProfile> users_;
  int original_users_;
};

// One user's fading realization with its direction/magnitude decomposition:
// direction = h/|h|, magnitude_per_antenna = |h|^2 / L.
struct ChannelVector {
  CVector h;
  CVector direction;
  Real magnitude_per_antenna = 0.0;

  ChannelVector() = default;
  explicit ChannelVector(CVector coeffs) : h(std::move(coeffs)) {
    Real norm = h.norm();
    magnitude_per_antenna = norm * norm / static_cast<Real>(h.size());
    direction = norm > 0.0 ? CVector(h / norm) : CVector(CVector::Zero(h.size()));
  }
};

}  // namespace bcfb
