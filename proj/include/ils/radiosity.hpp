// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ils/accel.hpp"
#include "ils/scene.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace ils {

/// Per-patch direct illuminance (lux) produced by a dim vector.
struct EmissionVector {
  Eigen::VectorXd illuminance;
  std::vector<double> dims;
};

/// F(i, j): fraction of diffuse flux leaving patch i that reaches patch j.
struct FormFactorMatrix {
  Eigen::MatrixXd F;
  Eigen::VectorXd areas;
};

struct RadiositySolution {
  Eigen::VectorXd exitance;  // lm/m^2
  double residual = 0.0;
};

/// Illuminance on `patch` from one point luminaire (inverse-square law with
/// the luminaire's distribution curve). Zero when the patch faces away or
/// the luminaire is occluded.
double direct_illuminance(const Patch& patch, const Luminaire& luminaire, double dim,
                          const AccelIndex& accel);

EmissionVector emission_vector(const Scene& scene, std::span<const double> dims,
                               const AccelIndex& accel);

/// Stratified sample points on a patch, in local (s, t) coordinates.
std::vector<Vec2> patch_sample_grid(int n_samples);

/// Area-to-area form factor: the exact point-to-polygon factor toward the
/// part of `to` left visible by other patches, averaged over `from`.
/// Unobstructed distant pairs use a Gauss-Legendre product rule with about
/// n_samples nodes; adjacent or obstructed pairs use n_samples grid cells
/// (four times as many when adjacent), split adaptively. With `occlusion`
/// off, other patches are ignored.
double form_factor(const Patch& from, const Patch& to, const AccelIndex& accel, int n_samples,
                   bool occlusion = true);

/// All pairwise form factors, reciprocity-symmetrized. Throws NumericError
/// when a row sums above 1 + 1e-3.
FormFactorMatrix form_factor_matrix(const std::vector<Patch>& patches, const AccelIndex& accel, int n_samples,
                                    bool occlusion = true);

struct SolverOptions {
  std::size_t dense_limit = 2000;  // above this size the Jacobi iteration is used
  int max_iterations = 100000;
  double tolerance = 1e-8;
};

/// Solves (I - R F) B = R E with R = diag(albedo). The system is factorized
/// once, so repeated solves for new emission vectors are cheap.
class RadiositySolver {
 public:
  RadiositySolver(const FormFactorMatrix& ff, std::span<const double> albedo, SolverOptions opts = {});

  RadiositySolution solve(const Eigen::VectorXd& emission) const;

  bool dense() const { return static_cast<bool>(qr_); }
  std::size_t size() const { return static_cast<std::size_t>(rf_.rows()); }

 private:
  double residual(const Eigen::VectorXd& b, const Eigen::VectorXd& rhs) const;

  Eigen::MatrixXd rf_;  // R F
  Eigen::VectorXd albedo_;
  std::shared_ptr<const Eigen::HouseholderQR<Eigen::MatrixXd>> qr_;
  SolverOptions opts_;
};

RadiositySolution solve_radiosity(const FormFactorMatrix& ff, std::span<const double> albedo,
                                  const EmissionVector& emission, SolverOptions opts = {});

/// Per-luminaire solutions at dim 1; any dim vector is their weighted sum.
struct LuminaireBasis {
  std::vector<int> luminaire_ids;
  std::vector<Eigen::VectorXd> emission;  // E^(l)
  std::vector<Eigen::VectorXd> exitance;  // B^(l)
  std::vector<double> residuals;

  Eigen::VectorXd combine_exitance(std::span<const double> dims) const;
  Eigen::VectorXd combine_emission(std::span<const double> dims) const;
};

struct BasisOptions {
  int n_samples = 16;
  bool occlusion = true;  // other patches block inter-patch transfer
  SolverOptions solver;
  std::optional<std::filesystem::path> ff_cache;
};

/// Result of the full pipeline for a scene: form factors plus basis.
struct RadiosityModel {
  FormFactorMatrix form_factors;
  LuminaireBasis basis;
  bool cache_hit = false;

  /// Light arriving at each patch: direct + interreflected.
  Eigen::VectorXd incident(std::span<const double> dims) const;
};

LuminaireBasis build_basis(const Scene& scene, const AccelIndex& accel, const FormFactorMatrix& ff,
                           const SolverOptions& opts = {});
RadiosityModel build_radiosity(const Scene& scene, const AccelIndex& accel,
                               const BasisOptions& opts = {});

// Binary form-factor cache keyed by a content hash of the patch set, the
// sample count, the ray epsilon and the occlusion flag.
std::uint64_t form_factor_key(const std::vector<Patch>& patches, int n_samples, double ray_epsilon,
                              bool occlusion = true);
void save_form_factors(const std::filesystem::path& path, std::uint64_t key, const FormFactorMatrix& ff);
std::optional<FormFactorMatrix> load_form_factors(const std::filesystem::path& path, std::uint64_t key);

}  // namespace ils
