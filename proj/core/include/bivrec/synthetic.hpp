#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "bivrec/coreg.hpp"
#include "bivrec/design.hpp"
#include "bivrec/records.hpp"

namespace bivrec {

enum class GeneratorKind { Stationary, Model };

// Forward-model parameters for the Model generator: the VAR probit with
// latent day fields, constant or spatially varying coregionalisation, and an
// isotropic or covariate-anisotropic kernel.
struct ModelParams {
  CoefMatrix coef = CoefMatrix::Zero();  // raw-scale, bivariate order
  CoregConstant coreg;
  double phi = 3.0 / 150.0;
  bool aniso = false;
  double phi_x = 0.0;
  bool spatially_varying = false;
  Eigen::Vector2d beta_a11{0.2, 0.0}, beta_a22{0.0, 0.0}, beta_a21{0.3, 0.0};
  double sigma2_a11 = 0.05, sigma2_a22 = 0.05, sigma2_a21 = 0.05;
  double phi_a = 1.0 / 300.0;
};

struct SyntheticSpec {
  int n_sites = 8;
  int n_years = 20;   // T
  int n_days = 30;    // modelled summer days (excluding the seed day)
  int first_year = 1;
  double domain_km = 300.0;  // stations uniform on [0, domain]^2
  GeneratorKind generator = GeneratorKind::Model;
  double tie_rate = 0.0;      // chance a non-record duplicates the weak-record value
  double missing_rate = 0.0;
  ModelParams model;
};

struct SyntheticData {
  std::vector<DailyTemperatureSeries> stations;
  RecordPanel truth_panel;   // marks the generator committed to, tie/missing aware
  ModelParams params;        // echo of the generating parameters (Model only)
  Eigen::VectorXd a11_s, a22_s, a21_s;  // realized fields when spatially varying
};

// Draws station geometry and daily series such that extract_indicators
// recovers the generator's indicator panel exactly: records are written as
// previous-weak-maximum plus a positive offset, non-records as the maximum
// minus a positive offset, ties as exact duplicates of the running value.
SyntheticData generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

}  // namespace bivrec
