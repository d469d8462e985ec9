#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "flrld/rng.hpp"
#include "flrld/sha256.hpp"
#include "flrld/tripledata.hpp"
#include "flrld/wire.hpp"

namespace flrld {

// Model numerics are 64-bit by default, which keeps update round-trips tight;
// defining FLRLD_SCALAR32 switches the parameter pipeline to 32-bit floats
// (serialized blobs stay 64-bit on the wire).
#if defined(FLRLD_SCALAR32)
using Scalar = float;
#else
using Scalar = double;
#endif

// 96-bit input features: the three ASNs of a triple as 32-bit big-endian
// binary expansions, concatenated. Lossless by construction.
inline constexpr int kEncodingBits = 96;

struct TripleEncoding {
  std::array<Scalar, kEncodingBits> bits{};
};

inline TripleEncoding encode_triple(const Triple& t) {
  TripleEncoding enc;
  const std::array<Asn, 3> parts{t.first, t.middle, t.last};
  for (int p = 0; p < 3; ++p)
    for (int i = 0; i < 32; ++i)
      enc.bits[32 * p + i] = Scalar((parts[p] >> (31 - i)) & 1u);
  return enc;
}

inline Triple decode_triple(const TripleEncoding& enc) {
  std::array<Asn, 3> parts{};
  for (int p = 0; p < 3; ++p)
    for (int i = 0; i < 32; ++i)
      if (enc.bits[32 * p + i] != Scalar(0)) parts[p] |= 1u << (31 - i);
  return Triple{parts[0], parts[1], parts[2]};
}

// Output slot 0 scores the regular class, slot 1 the malicious class: a
// triple is predicted regular when the first output is strictly larger.
inline int class_index(Label l) { return l == Label::Regular ? 0 : 1; }

enum class Architecture : std::uint8_t {
  // Single-step gated cell (input, forget, cell, output gates from the input
  // alone; zero initial state), then a rectified dense layer and softmax.
  RecurrentGated = 0,
  // Plain rectified dense block in place of the gated cell.
  Dense = 1,
};

struct ModelConfig {
  Architecture architecture = Architecture::RecurrentGated;
  int hidden1 = 128;
  int hidden2 = 64;
  int output = 2;
  std::uint64_t seed = 1;
  double learning_rate = 0.001;
  int batch_size = 32;
};

struct NetSpec {
  Architecture arch = Architecture::RecurrentGated;
  int input = kEncodingBits;
  int hidden1 = 128;
  int hidden2 = 64;
  int output = 2;

  friend bool operator==(const NetSpec&, const NetSpec&) = default;

  static NetSpec from_config(const ModelConfig& c) {
    return NetSpec{c.architecture, kEncodingBits, c.hidden1, c.hidden2, c.output};
  }
};

struct LayerShape {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t size() const { return rows * cols; }
};

inline std::vector<LayerShape> shape_table(const NetSpec& s) {
  std::vector<LayerShape> t;
  auto r = std::size_t(s.hidden1), c = std::size_t(s.input);
  if (s.arch == Architecture::RecurrentGated) {
    for (const char* gate : {"Wi", "Wf", "Wg", "Wo"}) {
      t.push_back({gate, r, c});
      t.push_back({std::string("b") + (gate + 1), r, 1});
    }
  } else {
    t.push_back({"W1", r, c});
    t.push_back({"b1", r, 1});
  }
  t.push_back({"W2", std::size_t(s.hidden2), r, });
  t.push_back({"b2", std::size_t(s.hidden2), 1});
  t.push_back({"W3", std::size_t(s.output), std::size_t(s.hidden2)});
  t.push_back({"b3", std::size_t(s.output), 1});
  return t;
}

inline std::size_t param_count(const NetSpec& s) {
  std::size_t gates = s.arch == Architecture::RecurrentGated ? 4 : 1;
  return gates * (std::size_t(s.hidden1) * std::size_t(s.input) + std::size_t(s.hidden1)) +
         std::size_t(s.hidden2) * std::size_t(s.hidden1) + std::size_t(s.hidden2) +
         std::size_t(s.output) * std::size_t(s.hidden2) + std::size_t(s.output);
}

// Flat parameter vector plus the shape table that determines its layout.
struct ModelParams {
  NetSpec spec;
  std::vector<Scalar> values;
  std::uint64_t version = 0;

  std::vector<LayerShape> shapes() const { return shape_table(spec); }
};

struct ModelUpdate {
  NetSpec spec;
  std::vector<Scalar> delta;
  std::uint64_t base_version = 0;
};

inline void require_same_shape(const NetSpec& a, const NetSpec& b, const char* what) {
  if (!(a == b)) throw InvariantError(std::string(what) + ": model shape mismatch");
}

inline void require_consistent(const ModelParams& params, const char* what) {
  if (params.values.size() != param_count(params.spec))
    throw InvariantError(std::string(what) + ": parameter vector does not match the shape table");
}

// Weights start uniform in +-1/sqrt(fan_in), biases at zero, drawn in layer
// order from the config seed so runs are replayable.
inline ModelParams init_model(const ModelConfig& config) {
  if (config.hidden1 < 1 || config.hidden2 < 1 || config.output != 2)
    throw DataError("model config must have positive widths and a 2-way output");
  ModelParams params;
  params.spec = NetSpec::from_config(config);
  params.values.assign(param_count(params.spec), 0.0);
  DetRng rng(config.seed);
  std::size_t at = 0;
  for (const LayerShape& layer : shape_table(params.spec)) {
    if (layer.cols > 1) {
      double bound = 1.0 / std::sqrt(double(layer.cols));
      for (std::size_t i = 0; i < layer.size(); ++i)
        params.values[at + i] = Scalar(rng.next_range(-bound, bound));
    }
    at += layer.size();
  }
  return params;
}

namespace detail {

// Raw layer views into one flat vector (parameters or gradients).
struct NetView {
  const NetSpec* spec;
  Scalar* wi;
  Scalar* bi;
  Scalar* wf;
  Scalar* bf;
  Scalar* wg;
  Scalar* bg;
  Scalar* wo;
  Scalar* bo;
  Scalar* w1;
  Scalar* b1;
  Scalar* w2;
  Scalar* b2;
  Scalar* w3;
  Scalar* b3;

  static NetView map(const NetSpec& spec, Scalar* base) {
    NetView v{};
    v.spec = &spec;
    std::size_t h1 = std::size_t(spec.hidden1), in = std::size_t(spec.input);
    std::size_t h2 = std::size_t(spec.hidden2), out = std::size_t(spec.output);
    Scalar* p = base;
    if (spec.arch == Architecture::RecurrentGated) {
      v.wi = p; p += h1 * in; v.bi = p; p += h1;
      v.wf = p; p += h1 * in; v.bf = p; p += h1;
      v.wg = p; p += h1 * in; v.bg = p; p += h1;
      v.wo = p; p += h1 * in; v.bo = p; p += h1;
    } else {
      v.w1 = p; p += h1 * in; v.b1 = p; p += h1;
    }
    v.w2 = p; p += h2 * h1; v.b2 = p; p += h2;
    v.w3 = p; p += out * h2; v.b3 = p; p += out;
    return v;
  }
};

inline Scalar sigmoid(Scalar x) { return Scalar(1) / (Scalar(1) + std::exp(-x)); }

// y = W x + b with W row-major (rows x cols).
inline void affine(const Scalar* w, const Scalar* b, const Scalar* x, std::size_t rows,
                   std::size_t cols, Scalar* y) {
  for (std::size_t r = 0; r < rows; ++r) {
    const Scalar* wr = w + r * cols;
    Scalar acc = b[r];
    for (std::size_t c = 0; c < cols; ++c) acc += wr[c] * x[c];
    y[r] = acc;
  }
}

// Per-sample activations kept for the backward pass.
struct ForwardCache {
  std::vector<Scalar> gate_i, gate_f, gate_g, gate_o, cell, tanh_cell;
  std::vector<Scalar> pre1;  // dense-arch pre-activation
  std::vector<Scalar> h1;
  std::vector<Scalar> pre2, h2;
  std::array<Scalar, 2> logits{};
  std::array<Scalar, 2> probs{};

  void resize(const NetSpec& s) {
    std::size_t h1n = std::size_t(s.hidden1), h2n = std::size_t(s.hidden2);
    if (s.arch == Architecture::RecurrentGated) {
      gate_i.resize(h1n);
      gate_f.resize(h1n);
      gate_g.resize(h1n);
      gate_o.resize(h1n);
      cell.resize(h1n);
      tanh_cell.resize(h1n);
    } else {
      pre1.resize(h1n);
    }
    h1.resize(h1n);
    pre2.resize(h2n);
    h2.resize(h2n);
  }
};

inline void forward_cached(const NetView& v, const Scalar* x, ForwardCache& c) {
  const NetSpec& s = *v.spec;
  std::size_t h1 = std::size_t(s.hidden1), in = std::size_t(s.input);
  std::size_t h2 = std::size_t(s.hidden2), out = std::size_t(s.output);
  if (s.arch == Architecture::RecurrentGated) {
    affine(v.wi, v.bi, x, h1, in, c.gate_i.data());
    affine(v.wf, v.bf, x, h1, in, c.gate_f.data());
    affine(v.wg, v.bg, x, h1, in, c.gate_g.data());
    affine(v.wo, v.bo, x, h1, in, c.gate_o.data());
    for (std::size_t r = 0; r < h1; ++r) {
      c.gate_i[r] = sigmoid(c.gate_i[r]);
      c.gate_f[r] = sigmoid(c.gate_f[r]);  // multiplies the zero initial state
      c.gate_g[r] = std::tanh(c.gate_g[r]);
      c.gate_o[r] = sigmoid(c.gate_o[r]);
      c.cell[r] = c.gate_i[r] * c.gate_g[r];
      c.tanh_cell[r] = std::tanh(c.cell[r]);
      c.h1[r] = c.gate_o[r] * c.tanh_cell[r];
    }
  } else {
    affine(v.w1, v.b1, x, h1, in, c.pre1.data());
    for (std::size_t r = 0; r < h1; ++r) c.h1[r] = c.pre1[r] > 0 ? c.pre1[r] : 0.0;
  }
  affine(v.w2, v.b2, c.h1.data(), h2, h1, c.pre2.data());
  for (std::size_t r = 0; r < h2; ++r) c.h2[r] = c.pre2[r] > 0 ? c.pre2[r] : 0.0;
  affine(v.w3, v.b3, c.h2.data(), out, h2, c.logits.data());
  Scalar mx = std::max(c.logits[0], c.logits[1]);
  Scalar e0 = std::exp(c.logits[0] - mx), e1 = std::exp(c.logits[1] - mx);
  c.probs[0] = e0 / (e0 + e1);
  c.probs[1] = e1 / (e0 + e1);
}

// Accumulates dL/dparams into `grad` for one sample; returns its loss.
inline double backward_accumulate(const NetView& v, const Scalar* x, int target,
                                  ForwardCache& c, const NetView& grad,
                                  std::vector<Scalar>& scratch) {
  const NetSpec& s = *v.spec;
  std::size_t h1 = std::size_t(s.hidden1), in = std::size_t(s.input);
  std::size_t h2 = std::size_t(s.hidden2), out = std::size_t(s.output);
  forward_cached(v, x, c);
  double loss = -std::log(std::max(double(c.probs[std::size_t(target)]), 1e-300));

  std::array<Scalar, 2> dlogits{};
  for (std::size_t k = 0; k < out; ++k)
    dlogits[k] = c.probs[k] - Scalar(std::size_t(target) == k ? 1 : 0);

  scratch.resize(h1 + h2);
  Scalar* dh2 = scratch.data();        // h2-sized
  Scalar* dh1 = scratch.data() + h2;   // h1-sized

  for (std::size_t r = 0; r < h2; ++r) dh2[r] = 0;
  for (std::size_t k = 0; k < out; ++k) {
    Scalar* gw3 = grad.w3 + k * h2;
    for (std::size_t r = 0; r < h2; ++r) {
      gw3[r] += dlogits[k] * c.h2[r];
      dh2[r] += v.w3[k * h2 + r] * dlogits[k];
    }
    grad.b3[k] += dlogits[k];
  }

  for (std::size_t r = 0; r < h2; ++r) dh2[r] = c.pre2[r] > 0 ? dh2[r] : Scalar(0);
  for (std::size_t r = 0; r < h1; ++r) dh1[r] = 0;
  for (std::size_t r = 0; r < h2; ++r) {
    Scalar* gw2 = grad.w2 + r * h1;
    const Scalar* w2r = v.w2 + r * h1;
    Scalar d = dh2[r];
    for (std::size_t k = 0; k < h1; ++k) {
      gw2[k] += d * c.h1[k];
      dh1[k] += w2r[k] * d;
    }
    grad.b2[r] += d;
  }

  if (s.arch == Architecture::RecurrentGated) {
    // h1 = o * tanh(i * g); the forget gate sees only the zero initial state,
    // so its gradient is identically zero.
    for (std::size_t r = 0; r < h1; ++r) {
      Scalar o = c.gate_o[r], i = c.gate_i[r], g = c.gate_g[r], tc = c.tanh_cell[r];
      Scalar dc = dh1[r] * o * (Scalar(1) - tc * tc);
      Scalar d_ao = dh1[r] * tc * o * (Scalar(1) - o);
      Scalar d_ai = dc * g * i * (Scalar(1) - i);
      Scalar d_ag = dc * i * (Scalar(1) - g * g);
      grad.bo[r] += d_ao;
      grad.bi[r] += d_ai;
      grad.bg[r] += d_ag;
      Scalar* gwo = grad.wo + r * in;
      Scalar* gwi = grad.wi + r * in;
      Scalar* gwg = grad.wg + r * in;
      for (std::size_t k = 0; k < in; ++k) {
        Scalar xv = x[k];
        if (xv == Scalar(0)) continue;  // binary features
        gwo[k] += d_ao * xv;
        gwi[k] += d_ai * xv;
        gwg[k] += d_ag * xv;
      }
    }
  } else {
    for (std::size_t r = 0; r < h1; ++r) {
      Scalar d = c.pre1[r] > 0 ? dh1[r] : Scalar(0);
      grad.b1[r] += d;
      Scalar* gw1 = grad.w1 + r * in;
      for (std::size_t k = 0; k < in; ++k)
        if (x[k] != Scalar(0)) gw1[k] += d * x[k];
    }
  }
  return loss;
}

}  // namespace detail

inline std::array<double, 2> forward_logits(const ModelParams& params, const TripleEncoding& x) {
  require_consistent(params, "forward_logits");
  detail::NetView v = detail::NetView::map(params.spec, const_cast<Scalar*>(params.values.data()));
  detail::ForwardCache cache;
  cache.resize(params.spec);
  detail::forward_cached(v, x.bits.data(), cache);
  return {double(cache.logits[0]), double(cache.logits[1])};
}

inline std::array<double, 2> forward(const ModelParams& params, const TripleEncoding& x) {
  require_consistent(params, "forward");
  detail::NetView v = detail::NetView::map(params.spec, const_cast<Scalar*>(params.values.data()));
  detail::ForwardCache cache;
  cache.resize(params.spec);
  detail::forward_cached(v, x.bits.data(), cache);
  return {double(cache.probs[0]), double(cache.probs[1])};
}

inline std::vector<std::array<double, 2>> forward_batch(const ModelParams& params,
                                                        std::span<const TripleEncoding> xs) {
  require_consistent(params, "forward_batch");
  detail::NetView v = detail::NetView::map(params.spec, const_cast<Scalar*>(params.values.data()));
  detail::ForwardCache cache;
  cache.resize(params.spec);
  std::vector<std::array<double, 2>> out;
  out.reserve(xs.size());
  for (const TripleEncoding& x : xs) {
    detail::forward_cached(v, x.bits.data(), cache);
    out.push_back({double(cache.probs[0]), double(cache.probs[1])});
  }
  return out;
}

// Ties predict malicious: when in doubt, flag the leak.
inline Label predict(const ModelParams& params, const Triple& t) {
  auto probs = forward(params, encode_triple(t));
  return probs[0] > probs[1] ? Label::Regular : Label::Malicious;
}

struct TrainTrace {
  std::vector<double> epoch_loss;  // mean cross-entropy per epoch
};

// One epoch of shuffled mini-batch Adam on mean cross-entropy. Optimizer
// moments are reset at each epoch boundary, and epoch e of a call seeded with
// s shuffles with seed s+e, so an `epochs`-epoch call is exactly the chain of
// single-epoch calls with consecutive seeds.
inline ModelParams train_epochs(const ModelParams& params, std::span<const LabeledTriple> data,
                                int epochs, const ModelConfig& config, std::uint64_t seed,
                                TrainTrace* trace = nullptr) {
  if (data.empty()) throw DataError("training data is empty");
  if (epochs < 0) throw DataError("negative epoch count");
  require_same_shape(params.spec, NetSpec::from_config(config), "train_epochs");
  require_consistent(params, "train_epochs");
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;

  ModelParams out = params;
  out.version = params.version + 1;
  const std::size_t n_params = out.values.size();
  const std::size_t batch_size = std::size_t(std::max(1, config.batch_size));

  std::vector<TripleEncoding> encodings(data.size());
  std::vector<int> targets(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    encodings[i] = encode_triple(data[i].triple);
    targets[i] = class_index(data[i].label);
  }

  std::vector<Scalar> grad(n_params), scratch;
  std::vector<double> m1(n_params), m2(n_params);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  detail::NetView pview = detail::NetView::map(out.spec, out.values.data());
  detail::NetView gview = detail::NetView::map(out.spec, grad.data());
  detail::ForwardCache cache;
  cache.resize(out.spec);

  for (int epoch = 0; epoch < epochs; ++epoch) {
    DetRng rng(seed + std::uint64_t(epoch));
    deterministic_shuffle(std::span(order), rng);
    std::fill(m1.begin(), m1.end(), 0.0);
    std::fill(m2.begin(), m2.end(), 0.0);
    double epoch_loss = 0.0;
    std::uint64_t step = 0;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      std::size_t end = std::min(order.size(), start + batch_size);
      std::fill(grad.begin(), grad.end(), Scalar(0));
      double batch_loss = 0.0;
      for (std::size_t bi = start; bi < end; ++bi) {
        std::size_t idx = order[bi];
        batch_loss += detail::backward_accumulate(pview, encodings[idx].bits.data(),
                                                  targets[idx], cache, gview, scratch);
      }
      double inv = 1.0 / double(end - start);
      epoch_loss += batch_loss;
      ++step;
      double bc1 = 1.0 - std::pow(kBeta1, double(step));
      double bc2 = 1.0 - std::pow(kBeta2, double(step));
      for (std::size_t i = 0; i < n_params; ++i) {
        double gi = double(grad[i]) * inv;
        m1[i] = kBeta1 * m1[i] + (1.0 - kBeta1) * gi;
        m2[i] = kBeta2 * m2[i] + (1.0 - kBeta2) * gi * gi;
        double mhat = m1[i] / bc1;
        double vhat = m2[i] / bc2;
        out.values[i] -= Scalar(config.learning_rate * mhat / (std::sqrt(vhat) + kEps));
      }
    }
    if (trace) trace->epoch_loss.push_back(epoch_loss / double(data.size()));
  }
  return out;
}

inline ModelParams train_epochs(const ModelParams& params, const ClientDataset& data, int epochs,
                                const ModelConfig& config, std::uint64_t seed,
                                TrainTrace* trace = nullptr) {
  return train_epochs(params, std::span<const LabeledTriple>(data.samples), epochs, config, seed,
                      trace);
}

// Mean cross-entropy of the model on a sample set (no training).
inline double mean_loss(const ModelParams& params, std::span<const LabeledTriple> data) {
  if (data.empty()) throw DataError("empty sample set");
  double total = 0.0;
  for (const LabeledTriple& lt : data) {
    auto probs = forward(params, encode_triple(lt.triple));
    total += -std::log(std::max(probs[std::size_t(class_index(lt.label))], 1e-300));
  }
  return total / double(data.size());
}

inline ModelUpdate model_get_update(const ModelParams& before, const ModelParams& after) {
  require_same_shape(before.spec, after.spec, "model_get_update");
  require_consistent(before, "model_get_update");
  require_consistent(after, "model_get_update");
  ModelUpdate u;
  u.spec = before.spec;
  u.base_version = before.version;
  u.delta.resize(before.values.size());
  for (std::size_t i = 0; i < u.delta.size(); ++i)
    u.delta[i] = after.values[i] - before.values[i];
  return u;
}

inline ModelParams apply_update(const ModelParams& params, const ModelUpdate& u) {
  require_same_shape(params.spec, u.spec, "apply_update");
  if (params.values.size() != u.delta.size())
    throw InvariantError("apply_update: parameter count mismatch");
  ModelParams out = params;
  out.version = params.version + 1;
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += u.delta[i];
  return out;
}

// ---------------------------------------------------------------------------
// Versioned binary serialization: header fields little-endian, then the flat
// parameter vector as little-endian 64-bit floats.

inline constexpr std::uint32_t kParamsFormatVersion = 1;

namespace detail {

inline void put_netspec(Bytes& out, const NetSpec& s) {
  out.push_back(static_cast<std::uint8_t>(s.arch));
  wire::put_u32_le(out, std::uint32_t(s.input));
  wire::put_u32_le(out, std::uint32_t(s.hidden1));
  wire::put_u32_le(out, std::uint32_t(s.hidden2));
  wire::put_u32_le(out, std::uint32_t(s.output));
}

inline NetSpec get_netspec(wire::Reader& r) {
  NetSpec s;
  std::uint8_t arch = r.u8();
  if (arch > 1) throw DataError("unknown architecture tag");
  s.arch = static_cast<Architecture>(arch);
  s.input = int(r.u32_le());
  s.hidden1 = int(r.u32_le());
  s.hidden2 = int(r.u32_le());
  s.output = int(r.u32_le());
  if (s.input != kEncodingBits || s.hidden1 < 1 || s.hidden2 < 1 || s.output != 2)
    throw DataError("invalid model dimensions");
  return s;
}

inline void check_magic(wire::Reader& r, const char* magic) {
  auto m = r.take(4);
  if (!std::equal(m.begin(), m.end(), reinterpret_cast<const std::uint8_t*>(magic)))
    throw DataError(std::string("bad magic, expected ") + magic);
}

}  // namespace detail

inline Bytes serialize_params(const ModelParams& params) {
  Bytes out;
  out.reserve(32 + params.values.size() * 8);
  out.insert(out.end(), {'F', 'L', 'R', 'P'});
  wire::put_u32_le(out, kParamsFormatVersion);
  detail::put_netspec(out, params.spec);
  wire::put_u64_le(out, params.version);
  wire::put_u64_le(out, params.values.size());
  for (Scalar v : params.values) wire::put_f64_le(out, double(v));
  return out;
}

inline ModelParams deserialize_params(std::span<const std::uint8_t> blob) {
  wire::Reader r(blob);
  detail::check_magic(r, "FLRP");
  if (r.u32_le() != kParamsFormatVersion) throw DataError("unsupported params format version");
  ModelParams params;
  params.spec = detail::get_netspec(r);
  params.version = r.u64_le();
  std::uint64_t count = r.u64_le();
  if (count != param_count(params.spec)) throw DataError("parameter count does not match shape");
  params.values.resize(count);
  for (std::uint64_t i = 0; i < count; ++i) params.values[i] = Scalar(r.f64_le());
  return params;
}

inline Bytes serialize_update(const ModelUpdate& u) {
  Bytes out;
  out.reserve(32 + u.delta.size() * 8);
  out.insert(out.end(), {'F', 'L', 'R', 'U'});
  wire::put_u32_le(out, kParamsFormatVersion);
  detail::put_netspec(out, u.spec);
  wire::put_u64_le(out, u.base_version);
  wire::put_u64_le(out, u.delta.size());
  for (Scalar v : u.delta) wire::put_f64_le(out, double(v));
  return out;
}

inline ModelUpdate deserialize_update(std::span<const std::uint8_t> blob) {
  wire::Reader r(blob);
  detail::check_magic(r, "FLRU");
  if (r.u32_le() != kParamsFormatVersion) throw DataError("unsupported update format version");
  ModelUpdate u;
  u.spec = detail::get_netspec(r);
  u.base_version = r.u64_le();
  std::uint64_t count = r.u64_le();
  if (count != param_count(u.spec)) throw DataError("delta length does not match shape");
  u.delta.resize(count);
  for (std::uint64_t i = 0; i < count; ++i) u.delta[i] = Scalar(r.f64_le());
  return u;
}

inline Digest params_digest(const ModelParams& params) {
  Bytes blob = serialize_params(params);
  return sha256(std::span<const std::uint8_t>(blob));
}

}  // namespace flrld
