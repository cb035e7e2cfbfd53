// Copyright 2026 The qvcopt Authors.

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * @file
 * Benchmark problems: synthetic classification datasets, CSV regression
 * ingestion, angle encoding of classical data, cross-entropy and MSE losses,
 * VQE / QAOA / barren-plateau problem builders, and the evaluation harness.
 */

#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qvcopt/circuit.hpp"
#include "qvcopt/env.hpp"
#include "qvcopt/gradients.hpp"
#include "qvcopt/opt.hpp"
#include "qvcopt/rng.hpp"
#include "qvcopt/statevector.hpp"

namespace qvcopt {

// ---------------------------------------------------------------------------
// Datasets
// ---------------------------------------------------------------------------

/**
 * Feature matrix plus labels. `features` is column-wise min-max normalized to
 * [0, pi] (ready for angle encoding); `raw` keeps the generated coordinates.
 * For regression (n_classes = 0) labels are normalized to [0, 1] with the
 * original range kept for de-normalization.
 */
struct Dataset {
    std::string name;
    std::vector<std::vector<double>> raw;
    std::vector<std::vector<double>> features;
    std::vector<double> labels;
    std::vector<std::size_t> train_idx, val_idx;
    int n_classes = 2; // 0 = regression
    double target_min = 0.0, target_max = 1.0;

    std::size_t n_samples() const { return features.size(); }
    std::size_t n_features() const { return features.empty() ? 0 : features[0].size(); }

    double denormalize_target(double t) const {
        return target_min + t * (target_max - target_min);
    }
};

namespace detail {

/// Min-max per column onto [0, hi]; constant columns map to zero.
inline std::vector<std::vector<double>>
normalize_columns(const std::vector<std::vector<double>> &rows, double hi) {
    if (rows.empty()) return {};
    const std::size_t cols = rows[0].size();
    std::vector<double> lo(cols, std::numeric_limits<double>::infinity());
    std::vector<double> up(cols, -std::numeric_limits<double>::infinity());
    for (const auto &r : rows)
        for (std::size_t c = 0; c < cols; ++c) {
            lo[c] = std::min(lo[c], r[c]);
            up[c] = std::max(up[c], r[c]);
        }
    std::vector<std::vector<double>> out(rows.size(), std::vector<double>(cols, 0.0));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t c = 0; c < cols; ++c)
            if (up[c] > lo[c])
                out[i][c] =
                    hi * std::clamp((rows[i][c] - lo[c]) / (up[c] - lo[c]), 0.0, 1.0);
    return out;
}

/// Deterministic shuffled 80/20 split.
inline void split_dataset(Dataset &ds, std::uint64_t seed, double train_fraction = 0.8) {
    std::vector<std::size_t> idx(ds.n_samples());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    Rng rng = Rng::from_seed(seed).stream("split");
    for (std::size_t i = idx.size() - 1; i > 0; --i)
        std::swap(idx[i], idx[rng.uniform_int(i + 1)]);
    const auto cut = static_cast<std::size_t>(
        std::round(train_fraction * static_cast<double>(idx.size())));
    ds.train_idx.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(cut));
    ds.val_idx.assign(idx.begin() + static_cast<std::ptrdiff_t>(cut), idx.end());
}

inline void finalize_classification(Dataset &ds, std::uint64_t seed) {
    ds.features = normalize_columns(ds.raw, std::numbers::pi);
    split_dataset(ds, seed);
}

} // namespace detail

/// Two concentric rings (class 0 at radius 1.0, class 1 at radius 0.5) with
/// Gaussian jitter of the given level.
inline Dataset make_circles(std::size_t n_samples, double noise_level,
                            std::uint64_t seed) {
    if (n_samples < 10) throw std::invalid_argument("make_circles: n_samples < 10");
    Dataset ds;
    ds.name = "circles";
    Rng rng = Rng::from_seed(seed).stream("circles");
    for (std::size_t i = 0; i < n_samples; ++i) {
        const int label = i % 2 == 0 ? 0 : 1;
        const double radius = label == 0 ? 1.0 : 0.5;
        const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
        ds.raw.push_back({radius * std::cos(angle) + noise_level * rng.normal(),
                          radius * std::sin(angle) + noise_level * rng.normal()});
        ds.labels.push_back(label);
    }
    detail::finalize_classification(ds, seed);
    return ds;
}

/// Two interleaved half-moons.
inline Dataset make_moons(std::size_t n_samples, double noise_level,
                          std::uint64_t seed) {
    if (n_samples < 10) throw std::invalid_argument("make_moons: n_samples < 10");
    Dataset ds;
    ds.name = "moons";
    Rng rng = Rng::from_seed(seed).stream("moons");
    for (std::size_t i = 0; i < n_samples; ++i) {
        const int label = i % 2 == 0 ? 0 : 1;
        const double t = rng.uniform(0.0, std::numbers::pi);
        double x = std::cos(t), y = std::sin(t);
        if (label == 1) {
            x = 1.0 - x;
            y = 0.5 - y;
        }
        ds.raw.push_back(
            {x + noise_level * rng.normal(), y + noise_level * rng.normal()});
        ds.labels.push_back(label);
    }
    detail::finalize_classification(ds, seed);
    return ds;
}

/// Isotropic Gaussian clusters in 7 dimensions, centers uniform in [-10, 10].
inline Dataset make_blobs(std::size_t n_samples, double cluster_std, int n_classes,
                          std::uint64_t seed, std::size_t n_features = 7) {
    if (n_samples < 10) throw std::invalid_argument("make_blobs: n_samples < 10");
    if (n_classes < 2) throw std::invalid_argument("make_blobs: n_classes < 2");
    Dataset ds;
    ds.name = "blobs";
    ds.n_classes = n_classes;
    Rng rng = Rng::from_seed(seed).stream("blobs");
    std::vector<std::vector<double>> centers;
    for (int k = 0; k < n_classes; ++k) {
        std::vector<double> c(n_features);
        for (double &v : c) v = rng.uniform(-10.0, 10.0);
        centers.push_back(std::move(c));
    }
    for (std::size_t i = 0; i < n_samples; ++i) {
        const int label = static_cast<int>(i % static_cast<std::size_t>(n_classes));
        std::vector<double> x(n_features);
        for (std::size_t d = 0; d < n_features; ++d)
            x[d] = centers[static_cast<std::size_t>(label)][d] +
                   cluster_std * rng.normal();
        ds.raw.push_back(std::move(x));
        ds.labels.push_back(label);
    }
    detail::finalize_classification(ds, seed);
    return ds;
}

/**
 * Loads a regression CSV: a header row, 13 numeric feature columns and one
 * numeric target column. Features normalize to [0, pi], the target to [0, 1]
 * (range kept for de-normalization); the 80/20 split is seed-deterministic.
 */
inline Dataset load_regression_csv(const std::string &path, std::uint64_t seed = 0) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_regression_csv: cannot open " + path);
    Dataset ds;
    ds.name = "regression";
    ds.n_classes = 0;
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("load_regression_csv: empty file");
    std::size_t row = 1;
    std::vector<double> targets;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        std::vector<double> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t pos = 0;
                const double v = std::stod(cell, &pos);
                while (pos < cell.size() && std::isspace(static_cast<unsigned char>(cell[pos])))
                    ++pos;
                if (pos != cell.size()) throw std::invalid_argument(cell);
                cells.push_back(v);
            } catch (const std::exception &) {
                throw std::runtime_error("load_regression_csv: non-numeric cell at row " +
                                         std::to_string(row));
            }
        }
        if (cells.size() != 14)
            throw std::runtime_error("load_regression_csv: expected 14 columns, got " +
                                     std::to_string(cells.size()) + " at row " +
                                     std::to_string(row));
        targets.push_back(cells.back());
        cells.pop_back();
        ds.raw.push_back(std::move(cells));
    }
    if (ds.raw.empty()) throw std::runtime_error("load_regression_csv: no data rows");
    ds.features = detail::normalize_columns(ds.raw, std::numbers::pi);
    ds.target_min = *std::min_element(targets.begin(), targets.end());
    ds.target_max = *std::max_element(targets.begin(), targets.end());
    const double range = ds.target_max > ds.target_min ? ds.target_max - ds.target_min : 1.0;
    for (double t : targets) ds.labels.push_back((t - ds.target_min) / range);
    detail::split_dataset(ds, seed);
    return ds;
}

// ---------------------------------------------------------------------------
// Losses
// ---------------------------------------------------------------------------

namespace detail {
constexpr double kProbClip = 1e-7;
}

/// Binary cross entropy with p = (1 + <Z_0>) / 2, clipped away from {0, 1}.
inline double bce_loss(double z_expectation, double label) {
    const double p = std::clamp(0.5 * (1.0 + z_expectation), detail::kProbClip,
                                1.0 - detail::kProbClip);
    return -(label * std::log(p) + (1.0 - label) * std::log(1.0 - p));
}

inline double bce_dloss_dz(double z_expectation, double label) {
    const double raw = 0.5 * (1.0 + z_expectation);
    if (raw <= detail::kProbClip || raw >= 1.0 - detail::kProbClip) return 0.0;
    return 0.5 * (raw - label) / (raw * (1.0 - raw));
}

/// Categorical cross entropy: softmax over the first k qubits' <Z_i>.
inline double cce_loss(std::span<const double> logits, int label) {
    const double mx = *std::max_element(logits.begin(), logits.end());
    double denom = 0.0;
    for (double z : logits) denom += std::exp(z - mx);
    return -(logits[static_cast<std::size_t>(label)] - mx - std::log(denom));
}

inline std::vector<double> cce_dloss_dlogits(std::span<const double> logits, int label) {
    const double mx = *std::max_element(logits.begin(), logits.end());
    double denom = 0.0;
    std::vector<double> out(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - mx);
        denom += out[i];
    }
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] /= denom;
        if (static_cast<int>(i) == label) out[i] -= 1.0;
    }
    return out;
}

inline double mse_loss(double prediction, double target) {
    const double d = prediction - target;
    return d * d;
}

// ---------------------------------------------------------------------------
// Data-to-circuit encoding
// ---------------------------------------------------------------------------

/// Angle-encoding prefix: RX(x_i) on qubit i, as fixed (non-trainable) gates.
inline std::vector<GateInstance> encode_sample(std::span<const double> features) {
    std::vector<GateInstance> gates;
    gates.reserve(features.size());
    for (std::size_t q = 0; q < features.size(); ++q)
        gates.push_back(
            make_fixed_rotation(GateKind::RX, static_cast<int>(q), features[q], 0));
    return gates;
}

/// Trainable skeleton for data tasks: the hardware-efficient ansatz placed
/// after the (layer-0) encoding slot.
inline Circuit data_task_skeleton(int n_qubits, int layers) {
    Circuit c = hardware_efficient_ansatz(n_qubits, layers);
    for (auto &g : c.gates) ++g.layer;
    c.depth = layers + 1;
    return c;
}

/// Full circuit for one sample: encoding prefix plus the trainable skeleton.
inline Circuit data_sample_circuit(const Circuit &skeleton,
                                   std::span<const double> features) {
    Circuit c = skeleton;
    const auto prefix = encode_sample(features);
    c.gates.insert(c.gates.begin(), prefix.begin(), prefix.end());
    return c;
}

// ---------------------------------------------------------------------------
// Deployment problems
// ---------------------------------------------------------------------------

/**
 * A deployable optimization problem: a loss over circuit parameters with the
 * configured noise model, a gradient, and (for data tasks) per-split metrics.
 * Matches the optimizer module's Problem concept.
 */
class DeployProblem {
  public:
    enum class Kind { Expectation, MseToTarget, Data };

    static DeployProblem expectation(std::string name, Circuit circuit,
                                     Observable cost, NoiseConfig noise) {
        DeployProblem p(std::move(name), Kind::Expectation, std::move(circuit), noise);
        p.cost_ = std::move(cost);
        p.loss_kind_ = LossKind::ExpectationValue;
        p.evaluator_.emplace(p.circuit_, p.cost_, p.noise_);
        return p;
    }

    static DeployProblem mse_to_target(std::string name, Circuit circuit,
                                       Observable cost, double target,
                                       NoiseConfig noise) {
        DeployProblem p(std::move(name), Kind::MseToTarget, std::move(circuit), noise);
        p.cost_ = std::move(cost);
        p.target_ = target;
        p.loss_kind_ = LossKind::MSE;
        p.evaluator_.emplace(p.circuit_, p.cost_, p.noise_);
        return p;
    }

    static DeployProblem data(Dataset dataset, NoiseConfig noise, int layers = 3,
                              std::size_t batch_size = 16) {
        const int n_qubits = static_cast<int>(dataset.n_features());
        DeployProblem p(dataset.name, Kind::Data, data_task_skeleton(n_qubits, layers),
                        noise);
        p.loss_kind_ = dataset.n_classes == 0   ? LossKind::MSE
                       : dataset.n_classes == 2 ? LossKind::BCE
                                                : LossKind::CCE;
        const int readouts =
            p.loss_kind_ == LossKind::CCE ? dataset.n_classes : 1;
        for (int k = 0; k < readouts; ++k) p.readouts_.push_back(z_string({k}));
        p.batch_size_ = batch_size;
        p.dataset_ = std::move(dataset);
        for (const auto &row : p.dataset_->features)
            p.sample_circuits_.push_back(data_sample_circuit(p.circuit_, row));
        p.depol_factor_ = depolarize_factor(p.circuit_.n_qubits, noise.depolarizing_p);
        return p;
    }

    const std::string &name() const { return name_; }
    Kind kind() const { return kind_; }
    LossKind loss_kind() const { return loss_kind_; }
    const Circuit &circuit() const { return circuit_; }
    std::size_t n_params() const { return static_cast<std::size_t>(circuit_.n_params); }
    const NoiseConfig &noise() const { return noise_; }
    const Observable &cost() const { return cost_; }
    double target() const { return target_; }
    const Dataset &dataset() const { return *dataset_; }

    Rng &noise_rng() {
        return kind_ == Kind::Data ? data_noise_rng_ : evaluator_->rng();
    }

    /// Fixes the minibatch for this iteration (data tasks only; deterministic
    /// in the iteration index).
    void begin_iteration(int iter) {
        if (kind_ != Kind::Data) return;
        batch_.clear();
        Rng rng = batch_stream_.stream(static_cast<std::uint64_t>(iter));
        const auto &train = dataset_->train_idx;
        for (std::size_t k = 0; k < std::min(batch_size_, train.size()); ++k)
            batch_.push_back(train[rng.uniform_int(train.size())]);
    }

    double loss(std::span<const double> theta) {
        switch (kind_) {
        case Kind::Expectation:
            return evaluator_->evaluate(theta);
        case Kind::MseToTarget:
            return mse_loss(evaluator_->evaluate(theta), target_);
        case Kind::Data: {
            if (batch_.empty()) begin_iteration(0);
            double acc = 0.0;
            for (const std::size_t s : batch_) acc += sample_loss(s, theta);
            return acc / static_cast<double>(batch_.size());
        }
        }
        throw std::logic_error("problem: unknown kind");
    }

    /// Noiseless loss of the same objective (diagnostics; exact pipeline).
    double exact_loss(std::span<const double> theta) const {
        switch (kind_) {
        case Kind::Expectation:
            return evaluator_->evaluate_exact(theta);
        case Kind::MseToTarget:
            return mse_loss(evaluator_->evaluate_exact(theta), target_);
        case Kind::Data: {
            double acc = 0.0;
            for (const std::size_t s : batch_) acc += sample_loss_exact(s, theta);
            return acc / static_cast<double>(batch_.size());
        }
        }
        throw std::logic_error("problem: unknown kind");
    }

    std::vector<double> gradient(std::span<const double> theta,
                                 GradMethod method = GradMethod::Auto) {
        switch (kind_) {
        case Kind::Expectation:
            return evaluator_->gradient(theta, method);
        case Kind::MseToTarget: {
            const double f = evaluator_->evaluate(theta);
            auto grad = evaluator_->gradient(theta, method);
            const double w = 2.0 * (f - target_);
            for (double &g : grad) g *= w;
            return grad;
        }
        case Kind::Data: {
            if (batch_.empty()) begin_iteration(0);
            std::vector<double> grad(n_params(), 0.0);
            for (const std::size_t s : batch_) {
                const auto g = sample_gradient(s, theta, method);
                for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += g[i];
            }
            for (double &g : grad) g /= static_cast<double>(batch_.size());
            return grad;
        }
        }
        throw std::logic_error("problem: unknown kind");
    }

    /// Mean per-sample loss over the train or validation split (data tasks).
    double split_loss(std::span<const double> theta, bool validation) {
        if (kind_ != Kind::Data)
            throw std::logic_error("split_loss: not a data problem");
        const auto &idx = validation ? dataset_->val_idx : dataset_->train_idx;
        double acc = 0.0;
        for (const std::size_t s : idx) acc += sample_loss(s, theta);
        return acc / static_cast<double>(idx.size());
    }

  private:
    DeployProblem(std::string name, Kind kind, Circuit circuit, NoiseConfig noise)
        : name_(std::move(name)), kind_(kind), circuit_(std::move(circuit)),
          noise_(noise),
          data_noise_rng_(Rng::from_seed(noise.rng_seed).stream("data-noise")),
          batch_stream_(Rng::from_seed(noise.rng_seed).stream("minibatch")) {
        noise_.validate();
        circuit_.validate();
    }

    std::vector<double> measure_readouts(const StateVector &state, Rng &rng,
                                         bool exact) const {
        std::vector<double> values;
        values.reserve(readouts_.size());
        if (!exact && noise_.shots) {
            // All readouts are Z-diagonal: one batch of shots serves them all.
            const auto counts = detail::sample_counts(state, *noise_.shots, rng);
            for (const auto &obs : readouts_)
                values.push_back(detail::z_string_from_counts(
                    counts, detail::term_z_mask(state, obs.terms[0]), *noise_.shots));
        } else {
            for (const auto &obs : readouts_)
                values.push_back(expectation_terms(state, obs));
        }
        for (double &v : values) v *= depol_factor_;
        return values;
    }

    double loss_from_readouts(std::span<const double> z, double label) const {
        switch (loss_kind_) {
        case LossKind::BCE: return bce_loss(z[0], label);
        case LossKind::CCE: return cce_loss(z, static_cast<int>(label));
        case LossKind::MSE: return mse_loss(0.5 * (1.0 + z[0]), label);
        default: throw std::logic_error("data loss: unsupported kind");
        }
    }

    std::vector<double> readout_weights(std::span<const double> z, double label) const {
        switch (loss_kind_) {
        case LossKind::BCE: return {bce_dloss_dz(z[0], label)};
        case LossKind::CCE: {
            // d loss / d z_i: logits are the z values themselves.
            return cce_dloss_dlogits(z, static_cast<int>(label));
        }
        case LossKind::MSE: {
            // prediction = (1 + z) / 2
            return {0.5 * (1.0 + z[0]) - label};
        }
        default: throw std::logic_error("data loss: unsupported kind");
        }
    }

    double sample_loss(std::size_t sample, std::span<const double> theta) {
        const StateVector state = run_circuit(sample_circuits_[sample], theta);
        const auto z = measure_readouts(state, data_noise_rng_, /*exact=*/false);
        return loss_from_readouts(z, dataset_->labels[sample]);
    }

    double sample_loss_exact(std::size_t sample, std::span<const double> theta) const {
        const StateVector state = run_circuit(sample_circuits_[sample], theta);
        std::vector<double> z;
        for (const auto &obs : readouts_)
            z.push_back(expectation_terms(state, obs) * depol_factor_);
        return loss_from_readouts(z, dataset_->labels[sample]);
    }

    std::vector<double> sample_gradient(std::size_t sample, std::span<const double> theta,
                                        GradMethod method) {
        // Chain rule through the readouts: grad = sum_i (dL/dz_i) dz_i/dtheta
        // = gradient of the single weighted observable sum_i w_i Z_i.
        const StateVector state = run_circuit(sample_circuits_[sample], theta);
        const auto z = measure_readouts(state, data_noise_rng_, /*exact=*/false);
        const auto weights = readout_weights(z, dataset_->labels[sample]);
        Observable combined;
        for (std::size_t i = 0; i < readouts_.size(); ++i) {
            if (weights[i] == 0.0) continue;
            PauliTerm t = readouts_[i].terms[0];
            t.weight = weights[i];
            combined.terms.push_back(std::move(t));
        }
        if (combined.terms.empty())
            return std::vector<double>(n_params(), 0.0);
        NoiseConfig nc = noise_;
        nc.rng_seed = data_noise_rng_.next_u64();
        Evaluator eval(sample_circuits_[sample], combined, nc);
        return eval.gradient(theta, method);
    }

    std::string name_;
    Kind kind_;
    Circuit circuit_;
    NoiseConfig noise_;
    Observable cost_;
    double target_ = 0.0;
    LossKind loss_kind_ = LossKind::ExpectationValue;
    std::optional<Evaluator> evaluator_;

    std::optional<Dataset> dataset_;
    std::vector<Circuit> sample_circuits_;
    std::vector<Observable> readouts_;
    double depol_factor_ = 1.0;
    std::size_t batch_size_ = 16;
    std::vector<std::size_t> batch_;
    Rng data_noise_rng_;
    Rng batch_stream_;
};

// ---------------------------------------------------------------------------
// Problem builders
// ---------------------------------------------------------------------------

/// Random 10-term Hamiltonian under a 5-layer hardware-efficient ansatz.
inline DeployProblem build_vqe_problem(int n_qubits, NoiseConfig noise,
                                       std::uint64_t seed, int n_terms = 10,
                                       int layers = 5) {
    Rng rng = Rng::from_seed(seed).stream("vqe");
    Observable h = random_hamiltonian(n_qubits, n_terms, rng);
    return DeployProblem::expectation("vqe" + std::to_string(n_qubits),
                                      hardware_efficient_ansatz(n_qubits, layers),
                                      std::move(h), noise);
}

/// MAX-CUT QAOA on a random cycle (2-regular connected graph).
inline DeployProblem build_qaoa_problem(int n_qubits, NoiseConfig noise,
                                        std::uint64_t seed, int p_layers = 10) {
    Rng rng = Rng::from_seed(seed).stream("qaoa");
    auto [circuit, cost] = qaoa_maxcut(random_cycle_graph(n_qubits, rng), p_layers);
    return DeployProblem::expectation("qaoa" + std::to_string(n_qubits),
                                      std::move(circuit), std::move(cost), noise);
}

/**
 * The 6-qubit barren-plateau toy: an RX layer, a circular CNOT ring, an RY
 * layer; global ProductZ cost, MSE to target -1, default 10000 shots.
 */
inline DeployProblem build_barren_plateau_problem(
    std::optional<std::uint64_t> shots = 10'000, double depolarizing_p = 0.0,
    std::uint64_t noise_seed = 0) {
    constexpr int n = 6;
    Circuit c;
    c.n_qubits = n;
    c.depth = 2;
    c.n_params = 2 * n;
    for (int q = 0; q < n; ++q)
        c.gates.push_back(make_rotation(GateKind::RX, q, q, 0));
    for (int q = 0; q < n; ++q) c.gates.push_back(make_cnot(q, (q + 1) % n, 0));
    for (int q = 0; q < n; ++q)
        c.gates.push_back(make_rotation(GateKind::RY, q, n + q, 1));
    NoiseConfig noise;
    noise.shots = shots;
    noise.depolarizing_p = depolarizing_p;
    noise.rng_seed = noise_seed;
    return DeployProblem::mse_to_target("barren_plateau", std::move(c),
                                        readout_cost(ReadoutKind::ProductZ, n), -1.0,
                                        noise);
}

inline DeployProblem build_data_problem(const Dataset &dataset, NoiseConfig noise,
                                        int layers = 3, std::size_t batch_size = 16) {
    return DeployProblem::data(dataset, noise, layers, batch_size);
}

// ---------------------------------------------------------------------------
// Barren-plateau gradient-scale measurement
// ---------------------------------------------------------------------------

struct GradientScale {
    double mean_abs = 0.0; // mean |dL/dtheta_i| over inits and coordinates
    double variance = 0.0; // pooled variance of dL/dtheta_i (the BP metric)
};

/// Exact loss gradients of the barren-plateau problem at uniform random
/// initializations, summarized as mean absolute component and pooled variance.
inline GradientScale bp_gradient_scale(int n_inits, std::uint64_t seed) {
    DeployProblem problem = build_barren_plateau_problem(std::nullopt);
    Rng rng = Rng::from_seed(seed).stream("bp-inits");
    std::vector<double> components;
    for (int i = 0; i < n_inits; ++i) {
        ParamVector theta(problem.n_params());
        for (double &t : theta) t = rng.uniform(-std::numbers::pi, std::numbers::pi);
        const auto grad = problem.gradient(theta, GradMethod::Adjoint);
        components.insert(components.end(), grad.begin(), grad.end());
    }
    GradientScale out;
    double mean = 0.0;
    for (double g : components) {
        out.mean_abs += std::abs(g);
        mean += g;
    }
    out.mean_abs /= static_cast<double>(components.size());
    mean /= static_cast<double>(components.size());
    for (double g : components) out.variance += (g - mean) * (g - mean);
    out.variance /= static_cast<double>(components.size() - 1);
    return out;
}

// ---------------------------------------------------------------------------
// Evaluation harness
// ---------------------------------------------------------------------------

enum class OptimizerKind { Gradient, Augmented, RollingAugmented, SacMlpSolo, SacCnnSolo };

constexpr const char *optimizer_name(OptimizerKind k) {
    switch (k) {
    case OptimizerKind::Gradient: return "gradient";
    case OptimizerKind::Augmented: return "augmented";
    case OptimizerKind::RollingAugmented: return "rolling_augmented";
    case OptimizerKind::SacMlpSolo: return "sac_mlp_solo";
    case OptimizerKind::SacCnnSolo: return "sac_cnn_solo";
    }
    return "?";
}

struct MetricRow {
    std::string task;
    std::string optimizer;
    std::string split; // "train" / "validation" / "cost"
    std::uint64_t seed = 0;
    double value = 0.0;
};

struct MetricSummary {
    double mean = 0.0;
    double stddev = 0.0; // (n - 1) denominator
    std::size_t n = 0;
};

inline MetricSummary summarize(std::span<const double> values) {
    MetricSummary s;
    s.n = values.size();
    if (s.n == 0) return s;
    for (double v : values) s.mean += v;
    s.mean /= static_cast<double>(s.n);
    if (s.n > 1) {
        for (double v : values) s.stddev += (v - s.mean) * (v - s.mean);
        s.stddev = std::sqrt(s.stddev / static_cast<double>(s.n - 1));
    }
    return s;
}

/// Builds the problem instance for (task, seed); the same seed must rebuild
/// the same instance so every optimizer sees the same problem.
using ProblemBuilder = std::function<DeployProblem(std::uint64_t seed)>;

struct RunSpec {
    std::string task;
    ProblemBuilder build;
    int iterations = 150;
};

/**
 * Runs one optimizer on one problem instance and reports final metrics:
 * train/validation split losses for data tasks, the final recorded cost for
 * expectation-style tasks.
 */
inline std::vector<MetricRow>
run_one(const RunSpec &spec, OptimizerKind opt, std::uint64_t seed,
        std::span<const AgentHandle> agents, const OptimizerConfig &cfg) {
    DeployProblem problem = spec.build(seed);
    Rng init = Rng::from_seed(seed).stream("theta0");
    ParamVector theta0(problem.n_params());
    for (double &t : theta0) t = init.uniform(-std::numbers::pi, std::numbers::pi);

    Trajectory traj;
    switch (opt) {
    case OptimizerKind::Gradient:
        traj = gradient_descent(problem, theta0, spec.iterations, cfg);
        break;
    case OptimizerKind::Augmented:
        traj = augmented_optimize(problem, theta0, spec.iterations, agents, cfg, false);
        break;
    case OptimizerKind::RollingAugmented:
        traj = augmented_optimize(problem, theta0, spec.iterations, agents, cfg, true);
        break;
    case OptimizerKind::SacMlpSolo:
    case OptimizerKind::SacCnnSolo: {
        const ObsKind want =
            opt == OptimizerKind::SacMlpSolo ? ObsKind::Feature : ObsKind::Block;
        const AgentHandle *found = nullptr;
        for (const auto &a : agents)
            if (a.kind == want) found = &a;
        if (!found) throw std::invalid_argument("run_one: no agent for solo optimizer");
        traj = solo_agent_optimize(problem, theta0, spec.iterations, *found);
        break;
    }
    }

    std::vector<MetricRow> rows;
    const ParamVector &final_theta = traj.steps.back().theta;
    if (problem.kind() == DeployProblem::Kind::Data) {
        rows.push_back({spec.task, optimizer_name(opt), "train", seed,
                        problem.split_loss(final_theta, false)});
        rows.push_back({spec.task, optimizer_name(opt), "validation", seed,
                        problem.split_loss(final_theta, true)});
    } else {
        rows.push_back(
            {spec.task, optimizer_name(opt), "cost", seed, problem.loss(final_theta)});
    }
    return rows;
}

/// The full grid: every (optimizer, seed) cell of one task, same instance per seed.
inline std::vector<MetricRow>
evaluate_task(const RunSpec &spec, std::span<const OptimizerKind> optimizers,
              std::span<const std::uint64_t> seeds, std::span<const AgentHandle> agents,
              const OptimizerConfig &cfg) {
    std::vector<MetricRow> rows;
    for (const std::uint64_t seed : seeds)
        for (const OptimizerKind opt : optimizers) {
            auto r = run_one(spec, opt, seed, agents, cfg);
            rows.insert(rows.end(), r.begin(), r.end());
        }
    return rows;
}

} // namespace qvcopt
