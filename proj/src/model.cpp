#include "attnmt/model.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

#include "attnmt/errors.hpp"
#include "attnmt/ops.hpp"

namespace nmt {

namespace {

Tensor uniform_tensor(std::vector<int> shape, Rng& rng) {
  Tensor t(std::move(shape));
  for (int i = 0; i < t.size(); ++i) t.ref(i) = rng.uniform(-0.1, 0.1);
  return t;
}

// One inverted-dropout mask per layer, sized to that layer's input.
std::vector<Tensor> layer_input_masks(const StackedLstmParams& params,
                                      double p, Rng& rng) {
  std::vector<Tensor> masks;
  masks.reserve(params.layers.size());
  for (const auto& layer : params.layers) {
    masks.push_back(ops::dropout_mask({layer.input_dim()}, p, rng, true));
  }
  return masks;
}

}  // namespace

void ModelConfig::validate() const {
  if (source_vocab < 2 || target_vocab < 2) {
    throw std::invalid_argument(
        "model config: vocabularies must cover the two reserved ids");
  }
  if (layers < 1) {
    throw std::invalid_argument("model config: need at least one layer");
  }
  if (cells < 1) {
    throw std::invalid_argument("model config: cell count must be positive");
  }
  if (use_attention) attention.validate();
}

std::vector<std::pair<std::string, Tensor>> NmtModel::parameters() const {
  std::vector<std::pair<std::string, Tensor>> out;
  out.emplace_back("src_embedding", src_embedding);
  out.emplace_back("tgt_embedding", tgt_embedding);
  auto add_stack = [&out](const std::string& prefix,
                          const StackedLstmParams& stack) {
    for (size_t l = 0; l < stack.layers.size(); ++l) {
      const std::string base = prefix + ".l" + std::to_string(l) + ".";
      out.emplace_back(base + "w_x", stack.layers[l].w_x);
      out.emplace_back(base + "w_h", stack.layers[l].w_h);
      out.emplace_back(base + "b", stack.layers[l].b);
    }
  };
  add_stack("encoder", encoder);
  add_stack("decoder", decoder);
  if (attention.w_a.defined()) out.emplace_back("attention.w_a", attention.w_a);
  if (attention.v_a.defined()) out.emplace_back("attention.v_a", attention.v_a);
  if (attention.w_c.defined()) out.emplace_back("attention.w_c", attention.w_c);
  if (attention.w_p.defined()) out.emplace_back("attention.w_p", attention.w_p);
  if (attention.v_p.defined()) out.emplace_back("attention.v_p", attention.v_p);
  out.emplace_back("w_s", w_s);
  return out;
}

NmtModel init_model(const ModelConfig& config, Rng& rng) {
  config.validate();
  NmtModel model;
  model.config = config;
  const int n = config.cells;
  model.src_embedding = uniform_tensor({config.source_vocab, n}, rng);
  model.tgt_embedding = uniform_tensor({config.target_vocab, n}, rng);
  model.encoder = init_lstm(config.layers, n, n, rng);
  model.decoder = init_lstm(config.layers, n, config.decoder_input_dim(), rng);
  if (config.use_attention) {
    model.attention = init_attention(config.attention, n, rng);
  }
  model.w_s = uniform_tensor({config.target_vocab, n}, rng);
  return model;
}

EncodeResult encode(Tape& tape, const NmtModel& model,
                    const std::vector<int>& source_ids, double dropout_p,
                    Rng* rng) {
  if (source_ids.empty()) {
    throw std::invalid_argument("encode: empty source sequence");
  }
  const bool train = dropout_p > 0.0 && rng != nullptr;
  LstmState state =
      LstmState::zeros(model.layer_count(), model.cell_count());
  std::vector<Tensor> tops;
  tops.reserve(source_ids.size());
  for (int id : source_ids) {
    Tensor x = ops::row(tape, model.src_embedding, id);
    std::vector<Tensor> masks;
    const std::vector<Tensor>* mask_ptr = nullptr;
    if (train) {
      masks = layer_input_masks(model.encoder, dropout_p, *rng);
      mask_ptr = &masks;
    }
    auto [next, top] = lstm_step(tape, model.encoder, state, x, mask_ptr);
    state = std::move(next);
    tops.push_back(std::move(top));
  }
  EncodeResult result;
  result.states = ops::stack_rows(tape, tops);
  result.final_state = std::move(state);
  return result;
}

StepOutput decode_step(Tape& tape, const NmtModel& model,
                       const LstmState& state, int prev_id,
                       const Tensor& prev_feed, const Tensor& encoder_states,
                       int t, double dropout_p, Rng* rng) {
  const bool train = dropout_p > 0.0 && rng != nullptr;
  Tensor x = ops::row(tape, model.tgt_embedding, prev_id);
  if (model.config.input_feeding) {
    if (!prev_feed.defined() || prev_feed.size() != model.cell_count()) {
      throw std::invalid_argument(
          "decode_step: feed vector must have one entry per cell");
    }
    x = ops::concat(tape, x, prev_feed);
  }
  std::vector<Tensor> masks;
  const std::vector<Tensor>* mask_ptr = nullptr;
  if (train) {
    masks = layer_input_masks(model.decoder, dropout_p, *rng);
    mask_ptr = &masks;
  }
  auto [next, top] = lstm_step(tape, model.decoder, state, x, mask_ptr);
  if (train) {
    Tensor top_mask =
        ops::dropout_mask({model.cell_count()}, dropout_p, *rng, true);
    top = ops::mul(tape, top, top_mask);
  }

  StepOutput out;
  out.state = std::move(next);
  if (model.attentional()) {
    AttentionOutput att = attend(tape, top, encoder_states, model.attention,
                                 model.config.attention, t);
    out.feed = att.attn_hidden;
    out.attention = std::move(att);
  } else {
    out.feed = top;
  }
  Tensor logits = ops::matvec(tape, model.w_s, out.feed);
  out.log_probs = ops::log_softmax(tape, logits);
  return out;
}

PairLoss pair_loss(Tape& tape, const NmtModel& model, const SentencePair& pair,
                   double dropout_p, Rng* rng, bool want_records) {
  if (pair.target_ids.empty()) {
    throw std::invalid_argument("pair_loss: empty target sequence");
  }
  EncodeResult enc = encode(tape, model, pair.source_ids, dropout_p, rng);
  LstmState state = enc.final_state;
  Tensor feed(std::vector<int>{model.cell_count()});  // zero h~ before step 0

  PairLoss result;
  result.tokens = static_cast<long>(pair.target_ids.size());
  Tensor log_lik;
  int prev_id = kEosId;
  for (size_t t = 0; t < pair.target_ids.size(); ++t) {
    StepOutput step =
        decode_step(tape, model, state, prev_id, feed, enc.states,
                    static_cast<int>(t), dropout_p, rng);
    Tensor lp = ops::pick(tape, step.log_probs, pair.target_ids[t]);
    log_lik = log_lik.defined() ? ops::add(tape, log_lik, lp) : lp;
    if (want_records && step.attention.has_value()) {
      result.records.push_back(std::move(*step.attention));
    }
    state = std::move(step.state);
    feed = std::move(step.feed);
    prev_id = pair.target_ids[t];
  }
  result.loss = ops::scale(tape, log_lik, -1.0);
  return result;
}

SequenceLossResult sequence_loss(const NmtModel& model, const Batch& batch,
                                 double dropout_p, Rng* rng,
                                 bool want_records) {
  SequenceLossResult result;
  for (const auto& pair : batch.pairs) {
    Tape tape;  // forward only; the tape is discarded
    PairLoss pl = pair_loss(tape, model, pair, dropout_p, rng, want_records);
    result.loss += pl.loss.value();
    result.tokens += pl.tokens;
    if (want_records) result.records.push_back(std::move(pl.records));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Container format: a text manifest followed by raw little-endian IEEE-754
// doubles. The manifest pins everything another implementation needs: the
// hyperparameters, the gate-block order inside LSTM weights, and a table of
// (name, shape, byte offset) entries for the blob.

namespace {

constexpr const char* kMagic = "attnmt-model-v1";
constexpr const char* kGateOrder = "gate_order input forget candidate output";

void write_doubles_le(std::ostream& os, const Tensor& t) {
  if constexpr (std::endian::native == std::endian::little) {
    os.write(reinterpret_cast<const char*>(t.data()),
             static_cast<std::streamsize>(t.size()) * 8);
  } else {
    for (int i = 0; i < t.size(); ++i) {
      const auto u = std::bit_cast<std::uint64_t>(t.data()[i]);
      char bytes[8];
      for (int k = 0; k < 8; ++k) {
        bytes[k] = static_cast<char>((u >> (8 * k)) & 0xff);
      }
      os.write(bytes, 8);
    }
  }
}

void read_doubles_le(const char* bytes, Tensor& t) {
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(t.data(), bytes, static_cast<size_t>(t.size()) * 8);
  } else {
    for (int i = 0; i < t.size(); ++i) {
      std::uint64_t u = 0;
      for (int k = 7; k >= 0; --k) {
        u = (u << 8) |
            static_cast<std::uint8_t>(bytes[static_cast<size_t>(i) * 8 + k]);
      }
      t.ref(i) = std::bit_cast<double>(u);
    }
  }
}

std::string next_line(std::istream& in, const std::string& path) {
  std::string line;
  if (!std::getline(in, line)) {
    throw DataError("model container truncated: " + path);
  }
  return line;
}

// Parses "key <int>" and returns the value.
long keyed_int(const std::string& line, const std::string& key,
               const std::string& path) {
  std::istringstream ss(line);
  std::string k;
  long v = 0;
  if (!(ss >> k >> v) || k != key) {
    throw DataError("model container: expected '" + key + " <value>' in " +
                    path);
  }
  std::string extra;
  if (ss >> extra) {
    throw DataError("model container: trailing tokens after '" + key +
                    "' in " + path);
  }
  return v;
}

}  // namespace

void save_model(const NmtModel& model, const std::string& path) {
  const auto params = model.parameters();
  std::ostringstream manifest;
  manifest << kMagic << "\n";
  manifest << "layers " << model.config.layers << "\n";
  manifest << "cells " << model.config.cells << "\n";
  manifest << "source_vocab " << model.config.source_vocab << "\n";
  manifest << "target_vocab " << model.config.target_vocab << "\n";
  manifest << "input_feeding " << (model.config.input_feeding ? 1 : 0) << "\n";
  manifest << "reverse_source " << (model.config.reverse_source ? 1 : 0)
           << "\n";
  if (model.config.use_attention) {
    manifest << "attention " << mechanism_name(model.config.attention.mechanism)
             << " " << score_name(model.config.attention.score) << " "
             << model.config.attention.window << " "
             << model.config.attention.max_source_len << "\n";
  } else {
    manifest << "attention none\n";
  }
  manifest << kGateOrder << "\n";
  manifest << "scalar_width 8\n";
  manifest << "params " << params.size() << "\n";
  std::uint64_t offset = 0;
  for (const auto& [name, tensor] : params) {
    manifest << "param " << name << " " << tensor.rank();
    for (int d = 0; d < tensor.rank(); ++d) manifest << " " << tensor.dim(d);
    manifest << " " << offset << "\n";
    offset += static_cast<std::uint64_t>(tensor.size()) * 8;
  }
  manifest << "data " << offset << "\n";

  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw DataError("cannot write model container: " + path);
  os << manifest.str();
  for (const auto& [name, tensor] : params) write_doubles_le(os, tensor);
  os.flush();
  if (!os) throw DataError("failed writing model container: " + path);
}

NmtModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read model container: " + path);

  if (next_line(in, path) != kMagic) {
    throw DataError("not a model container (bad magic line): " + path);
  }
  ModelConfig config;
  config.layers = static_cast<int>(keyed_int(next_line(in, path), "layers", path));
  config.cells = static_cast<int>(keyed_int(next_line(in, path), "cells", path));
  config.source_vocab =
      static_cast<int>(keyed_int(next_line(in, path), "source_vocab", path));
  config.target_vocab =
      static_cast<int>(keyed_int(next_line(in, path), "target_vocab", path));
  config.input_feeding =
      keyed_int(next_line(in, path), "input_feeding", path) != 0;
  config.reverse_source =
      keyed_int(next_line(in, path), "reverse_source", path) != 0;
  {
    std::istringstream ss(next_line(in, path));
    std::string key, mech;
    if (!(ss >> key >> mech) || key != "attention") {
      throw DataError("model container: expected attention line in " + path);
    }
    if (mech == "none") {
      config.use_attention = false;
    } else {
      config.use_attention = true;
      std::string score;
      int window = 0, max_len = 0;
      if (!(ss >> score >> window >> max_len)) {
        throw DataError("model container: malformed attention line in " +
                        path);
      }
      try {
        config.attention.mechanism = parse_mechanism(mech);
        config.attention.score = parse_score(score);
      } catch (const std::invalid_argument& e) {
        throw DataError(std::string("model container: ") + e.what() + " in " +
                        path);
      }
      config.attention.window = window;
      config.attention.max_source_len = max_len;
    }
  }
  if (next_line(in, path) != kGateOrder) {
    throw DataError("model container: unsupported gate order in " + path);
  }
  if (keyed_int(next_line(in, path), "scalar_width", path) != 8) {
    throw DataError("model container: unsupported scalar width in " + path);
  }
  const long declared = keyed_int(next_line(in, path), "params", path);

  try {
    config.validate();
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("model container: invalid configuration (") +
                    e.what() + ") in " + path);
  }

  // Build the tensor skeleton the configuration implies, then require the
  // manifest to describe exactly those tensors.
  Rng scratch_rng(0);
  NmtModel model = init_model(config, scratch_rng);
  auto params = model.parameters();
  if (declared != static_cast<long>(params.size())) {
    throw DataError("model container: parameter count mismatch in " + path);
  }
  std::map<std::string, Tensor> by_name;
  for (const auto& [name, tensor] : params) by_name.emplace(name, tensor);

  struct Entry {
    Tensor tensor;
    std::uint64_t offset;
  };
  std::vector<Entry> entries;
  std::uint64_t expected_offset = 0;
  for (long i = 0; i < declared; ++i) {
    std::istringstream ss(next_line(in, path));
    std::string key, name;
    int rank = 0;
    if (!(ss >> key >> name >> rank) || key != "param") {
      throw DataError("model container: malformed param line in " + path);
    }
    auto it = by_name.find(name);
    if (it == by_name.end()) {
      throw DataError("model container: unexpected parameter '" + name +
                      "' in " + path);
    }
    Tensor tensor = it->second;
    by_name.erase(it);
    if (rank != tensor.rank()) {
      throw DataError("model container: rank mismatch for '" + name +
                      "' in " + path);
    }
    for (int d = 0; d < rank; ++d) {
      int dim = 0;
      if (!(ss >> dim)) {
        throw DataError("model container: malformed param line in " + path);
      }
      if (dim != tensor.dim(d)) {
        throw DataError("model container: shape mismatch for '" + name +
                        "' in " + path);
      }
    }
    std::uint64_t offset = 0;
    if (!(ss >> offset) || offset != expected_offset) {
      throw DataError("model container: bad byte offset for '" + name +
                      "' in " + path);
    }
    entries.push_back({tensor, offset});
    expected_offset += static_cast<std::uint64_t>(tensor.size()) * 8;
  }
  const long nbytes = keyed_int(next_line(in, path), "data", path);
  if (nbytes != static_cast<long>(expected_offset)) {
    throw DataError("model container: data size mismatch in " + path);
  }

  std::vector<char> blob(static_cast<size_t>(nbytes));
  in.read(blob.data(), nbytes);
  if (in.gcount() != nbytes) {
    throw DataError("model container truncated: " + path);
  }
  char probe;
  if (in.read(&probe, 1), !in.eof()) {
    throw DataError("model container: trailing bytes in " + path);
  }
  for (auto& entry : entries) {
    read_doubles_le(blob.data() + entry.offset, entry.tensor);
  }
  return model;
}

}  // namespace nmt
