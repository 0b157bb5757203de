#include "wrapsim/neural.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace wrapsim {

namespace {

constexpr std::uint32_t kMagic = 0x4e4e5357;  // "WSNN"
constexpr std::uint32_t kVersion = 1;
constexpr double kHalfLog2Pi = 0.9189385332046727;  // 0.5*log(2*pi)
constexpr double kSquashEps = 1e-6;

Eigen::MatrixXd relu(Eigen::MatrixXd m) { return m.cwiseMax(0.0); }

Linear make_linear(int out, int in, Rng& rng) {
  // He-style uniform fan-in init
  const double limit = std::sqrt(6.0 / static_cast<double>(in));
  Linear l;
  l.weight.resize(out, in);
  for (int r = 0; r < out; ++r)
    for (int c = 0; c < in; ++c) l.weight(r, c) = rng.uniform(-limit, limit);
  l.bias = Eigen::VectorXd::Zero(out);
  return l;
}

Eigen::MatrixXd affine(const Eigen::MatrixXd& x, const Linear& l) {
  Eigen::MatrixXd y = x * l.weight.transpose();
  y.rowwise() += l.bias.transpose();
  return y;
}

void write_u32(std::ostream& os, std::uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
std::uint32_t read_u32(std::istream& is) {
  std::uint32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}
void write_doubles(std::ostream& os, const double* p, std::size_t n) {
  os.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
}
void read_doubles(std::istream& is, double* p, std::size_t n) {
  is.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
}

static_assert(std::endian::native == std::endian::little,
              "checkpoint format is little-endian");

}  // namespace

int MlpSpec::concat_dim() const {
  int d = 0;
  for (const auto& b : branches) d += b.widths.empty() ? b.input_dim : b.widths.back();
  return d;
}

void MlpGrads::setZero() {
  for (auto& w : weight) w.setZero();
  for (auto& b : bias) b.setZero();
}

Mlp::Mlp(MlpSpec spec, Rng& rng) : spec_(std::move(spec)) {
  if (spec_.branches.empty() || spec_.output_dim <= 0)
    throw InvalidArgument("mlp spec needs at least one branch and a positive output dim");
  for (const auto& b : spec_.branches) {
    std::vector<Linear> layers;
    int in = b.input_dim;
    if (in <= 0) throw InvalidArgument("branch input dim must be positive");
    for (int w : b.widths) {
      if (w <= 0) throw InvalidArgument("layer width must be positive");
      layers.push_back(make_linear(w, in, rng));
      in = w;
    }
    branch_layers_.push_back(std::move(layers));
  }
  int in = spec_.concat_dim();
  for (int w : spec_.trunk) {
    if (w <= 0) throw InvalidArgument("layer width must be positive");
    trunk_layers_.push_back(make_linear(w, in, rng));
    in = w;
  }
  out_layer_ = make_linear(spec_.output_dim, in, rng);
}

std::vector<Linear*> Mlp::layers() {
  std::vector<Linear*> out;
  for (auto& branch : branch_layers_)
    for (auto& l : branch) out.push_back(&l);
  for (auto& l : trunk_layers_) out.push_back(&l);
  out.push_back(&out_layer_);
  return out;
}

std::vector<const Linear*> Mlp::layers() const {
  std::vector<const Linear*> out;
  for (const auto& branch : branch_layers_)
    for (const auto& l : branch) out.push_back(&l);
  for (const auto& l : trunk_layers_) out.push_back(&l);
  out.push_back(&out_layer_);
  return out;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto* l : layers()) n += static_cast<std::size_t>(l->weight.size() + l->bias.size());
  return n;
}

Eigen::VectorXd Mlp::forward(const std::vector<Eigen::VectorXd>& inputs) const {
  if (inputs.size() != spec_.branches.size())
    throw DimensionMismatch("branch count mismatch");
  Eigen::VectorXd concat(spec_.concat_dim());
  int offset = 0;
  for (std::size_t b = 0; b < inputs.size(); ++b) {
    if (inputs[b].size() != spec_.branches[b].input_dim)
      throw DimensionMismatch("branch input dim mismatch");
    Eigen::VectorXd h = inputs[b];
    for (const auto& l : branch_layers_[b])
      h = ((l.weight * h + l.bias).cwiseMax(0.0)).eval();
    concat.segment(offset, h.size()) = h;
    offset += static_cast<int>(h.size());
  }
  Eigen::VectorXd h = concat;
  for (const auto& l : trunk_layers_) h = ((l.weight * h + l.bias).cwiseMax(0.0)).eval();
  return out_layer_.weight * h + out_layer_.bias;
}

Eigen::MatrixXd Mlp::forward_batch(const std::vector<Eigen::MatrixXd>& inputs,
                                   MlpCache* cache) const {
  if (inputs.size() != spec_.branches.size())
    throw DimensionMismatch("branch count mismatch");
  const auto rows = inputs.front().rows();
  Eigen::MatrixXd concat(rows, spec_.concat_dim());
  if (cache) {
    cache->branch_inputs = inputs;
    cache->branch_acts.assign(inputs.size(), {});
    cache->trunk_acts.clear();
  }
  int offset = 0;
  for (std::size_t b = 0; b < inputs.size(); ++b) {
    if (inputs[b].cols() != spec_.branches[b].input_dim || inputs[b].rows() != rows)
      throw DimensionMismatch("branch input shape mismatch");
    Eigen::MatrixXd h = inputs[b];
    for (const auto& l : branch_layers_[b]) {
      h = relu(affine(h, l));
      if (cache) cache->branch_acts[b].push_back(h);
    }
    concat.middleCols(offset, h.cols()) = h;
    offset += static_cast<int>(h.cols());
  }
  if (cache) cache->concat = concat;
  Eigen::MatrixXd h = std::move(concat);
  for (const auto& l : trunk_layers_) {
    h = relu(affine(h, l));
    if (cache) cache->trunk_acts.push_back(h);
  }
  return affine(h, out_layer_);
}

MlpGrads Mlp::init_grads() const {
  MlpGrads g;
  for (const auto* l : layers()) {
    g.weight.push_back(Eigen::MatrixXd::Zero(l->weight.rows(), l->weight.cols()));
    g.bias.push_back(Eigen::VectorXd::Zero(l->bias.size()));
  }
  return g;
}

void Mlp::backward(const MlpCache& cache, const Eigen::MatrixXd& grad_out,
                   MlpGrads& grads, std::vector<Eigen::MatrixXd>* grad_inputs) const {
  const std::size_t n_branches = branch_layers_.size();
  std::size_t layer_idx = grads.weight.size() - 1;  // output layer last

  // output layer
  const Eigen::MatrixXd& trunk_last =
      trunk_layers_.empty() ? cache.concat : cache.trunk_acts.back();
  grads.weight[layer_idx].noalias() += grad_out.transpose() * trunk_last;
  grads.bias[layer_idx] += grad_out.colwise().sum().transpose();
  Eigen::MatrixXd dh = grad_out * out_layer_.weight;
  --layer_idx;

  // trunk layers, reverse
  for (std::size_t i = trunk_layers_.size(); i-- > 0;) {
    const Eigen::MatrixXd& act = cache.trunk_acts[i];
    dh = (dh.array() * (act.array() > 0.0).cast<double>()).matrix();
    const Eigen::MatrixXd& prev = i == 0 ? cache.concat : cache.trunk_acts[i - 1];
    grads.weight[layer_idx].noalias() += dh.transpose() * prev;
    grads.bias[layer_idx] += dh.colwise().sum().transpose();
    dh = (dh * trunk_layers_[i].weight).eval();
    --layer_idx;
  }

  if (grad_inputs) grad_inputs->assign(n_branches, {});

  // split the concat gradient between branches; walk branches in reverse so
  // layer_idx stays aligned with the canonical layer order
  std::vector<int> offsets(n_branches);
  {
    int off = 0;
    for (std::size_t b = 0; b < n_branches; ++b) {
      offsets[b] = off;
      off += spec_.branches[b].widths.empty() ? spec_.branches[b].input_dim
                                              : spec_.branches[b].widths.back();
    }
  }
  for (std::size_t b = n_branches; b-- > 0;) {
    const int width = spec_.branches[b].widths.empty()
                          ? spec_.branches[b].input_dim
                          : spec_.branches[b].widths.back();
    Eigen::MatrixXd db = dh.middleCols(offsets[b], width);
    for (std::size_t i = branch_layers_[b].size(); i-- > 0;) {
      const Eigen::MatrixXd& act = cache.branch_acts[b][i];
      db = (db.array() * (act.array() > 0.0).cast<double>()).matrix();
      const Eigen::MatrixXd& prev =
          i == 0 ? cache.branch_inputs[b] : cache.branch_acts[b][i - 1];
      grads.weight[layer_idx].noalias() += db.transpose() * prev;
      grads.bias[layer_idx] += db.colwise().sum().transpose();
      db = (db * branch_layers_[b][i].weight).eval();
      --layer_idx;
    }
    if (grad_inputs) (*grad_inputs)[b] = db;
  }
}

void Mlp::save(std::ostream& os) const {
  write_u32(os, kMagic);
  write_u32(os, kVersion);
  write_u32(os, static_cast<std::uint32_t>(spec_.branches.size()));
  for (const auto& b : spec_.branches) {
    write_u32(os, static_cast<std::uint32_t>(b.input_dim));
    write_u32(os, static_cast<std::uint32_t>(b.widths.size()));
    for (int w : b.widths) write_u32(os, static_cast<std::uint32_t>(w));
  }
  write_u32(os, static_cast<std::uint32_t>(spec_.trunk.size()));
  for (int w : spec_.trunk) write_u32(os, static_cast<std::uint32_t>(w));
  write_u32(os, static_cast<std::uint32_t>(spec_.output_dim));
  for (const auto* l : layers()) {
    write_doubles(os, l->weight.data(), static_cast<std::size_t>(l->weight.size()));
    write_doubles(os, l->bias.data(), static_cast<std::size_t>(l->bias.size()));
  }
  if (!os) throw IoFailure("failed writing network checkpoint");
}

Mlp Mlp::load(std::istream& is) {
  if (read_u32(is) != kMagic) throw IoFailure("bad checkpoint magic");
  if (read_u32(is) != kVersion) throw IoFailure("unsupported checkpoint version");
  MlpSpec spec;
  const std::uint32_t n_branches = read_u32(is);
  for (std::uint32_t i = 0; i < n_branches; ++i) {
    BranchSpec b;
    b.input_dim = static_cast<int>(read_u32(is));
    const std::uint32_t nw = read_u32(is);
    for (std::uint32_t j = 0; j < nw; ++j) b.widths.push_back(static_cast<int>(read_u32(is)));
    spec.branches.push_back(std::move(b));
  }
  const std::uint32_t nt = read_u32(is);
  for (std::uint32_t j = 0; j < nt; ++j) spec.trunk.push_back(static_cast<int>(read_u32(is)));
  spec.output_dim = static_cast<int>(read_u32(is));

  Rng dummy(0);
  Mlp net(spec, dummy);
  for (auto* l : net.layers()) {
    read_doubles(is, l->weight.data(), static_cast<std::size_t>(l->weight.size()));
    read_doubles(is, l->bias.data(), static_cast<std::size_t>(l->bias.size()));
  }
  if (!is) throw IoFailure("truncated network checkpoint");
  return net;
}

void Mlp::save_file(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoFailure("cannot open for write: " + path);
  save(os);
}

Mlp Mlp::load_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw MissingCheckpoint(path);
  return load(is);
}

bool Mlp::equal_parameters(const Mlp& other) const {
  if (!(spec_ == other.spec_)) return false;
  auto a = layers();
  auto b = other.layers();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i]->weight != b[i]->weight || a[i]->bias != b[i]->bias) return false;
  }
  return true;
}

double adam_scalar_update(double grad, double& m, double& v, std::int64_t t,
                          const AdamConfig& cfg) {
  m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad;
  v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad * grad;
  const double m_hat = m / (1.0 - std::pow(cfg.beta1, static_cast<double>(t)));
  const double v_hat = v / (1.0 - std::pow(cfg.beta2, static_cast<double>(t)));
  return -cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
}

Adam::Adam(const Mlp& net, AdamConfig cfg) : cfg_(cfg) {
  for (const auto* l : net.layers()) {
    m_w_.push_back(Eigen::MatrixXd::Zero(l->weight.rows(), l->weight.cols()));
    v_w_.push_back(Eigen::MatrixXd::Zero(l->weight.rows(), l->weight.cols()));
    m_b_.push_back(Eigen::VectorXd::Zero(l->bias.size()));
    v_b_.push_back(Eigen::VectorXd::Zero(l->bias.size()));
  }
}

void Adam::step(Mlp& net, const MlpGrads& grads) {
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  auto layers = net.layers();
  if (layers.size() != grads.weight.size())
    throw DimensionMismatch("gradient/layer count mismatch");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    auto& mw = m_w_[i];
    auto& vw = v_w_[i];
    mw = cfg_.beta1 * mw + (1.0 - cfg_.beta1) * grads.weight[i];
    vw = cfg_.beta2 * vw.array().matrix() +
         (1.0 - cfg_.beta2) * grads.weight[i].cwiseProduct(grads.weight[i]);
    layers[i]->weight.array() -=
        cfg_.lr * (mw.array() / bc1) / ((vw.array() / bc2).sqrt() + cfg_.eps);

    auto& mb = m_b_[i];
    auto& vb = v_b_[i];
    mb = cfg_.beta1 * mb + (1.0 - cfg_.beta1) * grads.bias[i];
    vb = cfg_.beta2 * vb + (1.0 - cfg_.beta2) * grads.bias[i].cwiseProduct(grads.bias[i]);
    layers[i]->bias.array() -=
        cfg_.lr * (mb.array() / bc1) / ((vb.array() / bc2).sqrt() + cfg_.eps);
  }
}

MseResult mse_loss(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols())
    throw DimensionMismatch("mse operand shape mismatch");
  const double n = static_cast<double>(pred.size());
  MseResult r;
  Eigen::MatrixXd diff = pred - target;
  r.loss = diff.squaredNorm() / n;
  r.grad = (2.0 / n) * diff;
  return r;
}

SquashedGaussian squash_sample(const Eigen::VectorXd& mean,
                               const Eigen::VectorXd& log_std_raw, Rng& rng) {
  SquashedGaussian s;
  const auto n = mean.size();
  s.eps.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) s.eps(i) = rng.normal();
  s.pre_tanh.resize(n);
  s.action.resize(n);
  double logp = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double ls = std::clamp(log_std_raw(i), kLogStdMin, kLogStdMax);
    const double std = std::exp(ls);
    s.pre_tanh(i) = mean(i) + std * s.eps(i);
    const double a = std::tanh(s.pre_tanh(i));
    s.action(i) = a;
    logp += -0.5 * s.eps(i) * s.eps(i) - ls - kHalfLog2Pi - std::log(1.0 - a * a + kSquashEps);
  }
  s.log_prob = logp;
  return s;
}

double squashed_log_prob(const Eigen::VectorXd& mean,
                         const Eigen::VectorXd& log_std_raw,
                         const Eigen::VectorXd& pre_tanh) {
  double logp = 0.0;
  for (Eigen::Index i = 0; i < mean.size(); ++i) {
    const double ls = std::clamp(log_std_raw(i), kLogStdMin, kLogStdMax);
    const double std = std::exp(ls);
    const double eps = (pre_tanh(i) - mean(i)) / std;
    const double a = std::tanh(pre_tanh(i));
    logp += -0.5 * eps * eps - ls - kHalfLog2Pi - std::log(1.0 - a * a + kSquashEps);
  }
  return logp;
}

}  // namespace wrapsim
