#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "wrapsim/errors.hpp"
#include "wrapsim/rng.hpp"

namespace wrapsim {

inline constexpr double kLogStdMin = -20.0;
inline constexpr double kLogStdMax = 2.0;

struct BranchSpec {
  int input_dim = 0;
  std::vector<int> widths;  // hidden widths, ReLU; empty = pass-through
};

/// Multi-branch MLP: each branch feeds hidden ReLU layers, outputs are
/// concatenated, then trunk hidden ReLU layers, then a linear output.
struct MlpSpec {
  std::vector<BranchSpec> branches;
  std::vector<int> trunk;
  int output_dim = 0;

  int concat_dim() const;
  bool operator==(const MlpSpec&) const = default;
};

struct Linear {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
};

struct MlpCache {
  std::vector<Eigen::MatrixXd> branch_inputs;
  std::vector<std::vector<Eigen::MatrixXd>> branch_acts;
  Eigen::MatrixXd concat;
  std::vector<Eigen::MatrixXd> trunk_acts;
};

struct MlpGrads {
  std::vector<Eigen::MatrixXd> weight;
  std::vector<Eigen::VectorXd> bias;

  void setZero();
};

class Mlp {
 public:
  Mlp() = default;
  Mlp(MlpSpec spec, Rng& rng);

  const MlpSpec& spec() const { return spec_; }

  /// Layers in canonical order: branch 0 layers, branch 1 layers, ...,
  /// trunk layers, output layer.
  std::vector<Linear*> layers();
  std::vector<const Linear*> layers() const;
  std::size_t parameter_count() const;

  Eigen::VectorXd forward(const std::vector<Eigen::VectorXd>& inputs) const;

  /// Batch forward, rows = samples. Fills `cache` when non-null.
  Eigen::MatrixXd forward_batch(const std::vector<Eigen::MatrixXd>& inputs,
                                MlpCache* cache = nullptr) const;

  /// Backprop for the batch that produced `cache`. Parameter gradients are
  /// written to `grads` (shapes must match; call init_grads first);
  /// per-branch input gradients are written to `grad_inputs` when non-null.
  void backward(const MlpCache& cache, const Eigen::MatrixXd& grad_out,
                MlpGrads& grads,
                std::vector<Eigen::MatrixXd>* grad_inputs = nullptr) const;

  MlpGrads init_grads() const;

  void save(std::ostream& os) const;
  static Mlp load(std::istream& is);
  void save_file(const std::string& path) const;
  static Mlp load_file(const std::string& path);

  bool equal_parameters(const Mlp& other) const;

 private:
  MlpSpec spec_;
  std::vector<std::vector<Linear>> branch_layers_;
  std::vector<Linear> trunk_layers_;
  Linear out_layer_;
};

struct AdamConfig {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Scalar Adam update with bias correction; `t` is the 1-based step index.
double adam_scalar_update(double grad, double& m, double& v, std::int64_t t,
                          const AdamConfig& cfg);

class Adam {
 public:
  Adam() = default;
  Adam(const Mlp& net, AdamConfig cfg = {});

  void step(Mlp& net, const MlpGrads& grads);
  std::int64_t step_count() const { return t_; }
  const AdamConfig& config() const { return cfg_; }

 private:
  AdamConfig cfg_;
  std::int64_t t_ = 0;
  std::vector<Eigen::MatrixXd> m_w_, v_w_;
  std::vector<Eigen::VectorXd> m_b_, v_b_;
};

struct MseResult {
  double loss = 0.0;
  Eigen::MatrixXd grad;  // dloss/dpred
};

/// Mean over all elements of the squared difference.
MseResult mse_loss(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target);

/// Tanh-squashed diagonal Gaussian over the last network output,
/// interpreted as [mean, log_std] (log_std clamped to [-20, 2]).
struct SquashedGaussian {
  Eigen::VectorXd action;    // in (-1, 1)^A
  Eigen::VectorXd pre_tanh;  // mean + std * eps
  Eigen::VectorXd eps;
  double log_prob = 0.0;
};

SquashedGaussian squash_sample(const Eigen::VectorXd& mean,
                               const Eigen::VectorXd& log_std_raw, Rng& rng);

/// Log-density of `action` under the squashed Gaussian (change of variables).
double squashed_log_prob(const Eigen::VectorXd& mean,
                         const Eigen::VectorXd& log_std_raw,
                         const Eigen::VectorXd& pre_tanh);

}  // namespace wrapsim
