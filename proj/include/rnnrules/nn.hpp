#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rnnrules/automata.hpp"
#include "rnnrules/common.hpp"
#include "rnnrules/dataset.hpp"

namespace rnnrules::nn {

enum class CellKind { Lstm, Gru, O2rnn, Mirnn };

CellKind parse_cell(const std::string& name);
std::string cell_name(CellKind kind);
std::vector<std::string> valid_cell_names();

struct Param {
  std::string name;
  std::vector<int> shape;
  int fan_in = 0;
  int fan_out = 0;
  bool is_bias = false;  // biases (and MIRNN gate vectors) initialize to 1
  std::vector<double> v;

  size_t size() const { return v.size(); }
};

struct TrainMeta {
  std::string stop_reason;  // max_iterations | early_stop | threshold_reached
  double final_val_acc = -1.0;
  long iterations = 0;
  long best_iteration = 0;
};

/// A recurrent binary classifier: cell parameters plus a single logistic
/// head on the final hidden state. Parameter order is fixed per cell kind
/// and is the checkpoint serialization order.
struct RnnModel {
  CellKind kind = CellKind::O2rnn;
  automata::Alphabet alphabet;
  int input_dim = 0;
  int hidden_dim = 0;
  uint64_t seed = 0;
  std::vector<Param> params;
  TrainMeta meta;

  const Param& param(std::string_view name) const;
  Param& param(std::string_view name);
  size_t param_count() const;
};

/// Recurrent state; `c` is used by LSTM only.
struct State {
  std::vector<double> h;
  std::vector<double> c;
};

/// Fan-in/fan-out uniform weights, biases set to 1, deterministic per seed.
RnnModel init_params(CellKind kind, const automata::Alphabet& alphabet, int hidden_dim,
                     uint64_t seed);

/// Zero state for LSTM/GRU/MIRNN. The second-order cell starts from the
/// first basis vector: its bilinear update multiplies the state into every
/// input term, so an all-zero start would erase the first symbol.
State initial_state(const RnnModel& model);

/// One transition from a one-hot input vector; validates shapes.
State forward_step(const RnnModel& model, const std::vector<double>& one_hot_x, const State& state);
/// Same transition addressed by symbol index.
State forward_step_sym(const RnnModel& model, int sym, const State& state);

struct HiddenTrace {
  std::vector<int> symbols;
  std::vector<std::vector<double>> states;  // states[0] = h_init; one per step after
  double probability = 0.0;
  bool prediction = false;
};

struct HiddenTraceSet {
  std::vector<double> h_init;
  std::vector<HiddenTrace> traces;
};

/// Runs the cell over s from the initial state and applies the head to the
/// final hidden vector. The empty string is classified from the initial
/// state directly.
std::pair<double, HiddenTrace> classify(const RnnModel& model, std::string_view s);
bool decide(const RnnModel& model, std::string_view s);
double evaluate_model(const RnnModel& model, const std::vector<automata::Sample>& split);

struct TrainSample {
  const std::string* s = nullptr;
  bool label = false;
  const std::vector<uint8_t>* prefix_labels = nullptr;  // required when per-step loss is on
};

struct LossGrads {
  double loss = 0.0;
  std::vector<std::vector<double>> grads;  // aligned with model.params
};

/// Mean binary cross-entropy over the batch (over every prefix step when
/// per_step_loss), with full backpropagation through time.
LossGrads loss_and_grads(const RnnModel& model, const std::vector<TrainSample>& batch,
                         bool per_step_loss);

struct TrainConfig {
  int batch_size = 2048;
  long max_iterations = 15000;
  double initial_lr = 0.01;  // one-cycle peak
  long patience = 1000;      // iterations without val improvement
  long eval_every = 50;
  bool per_step_loss = false;
  std::optional<double> partial_threshold;  // stop at first val acc above it
  std::vector<double> lr_grid;              // used by train_with_grid
  uint64_t seed = 0;                        // batch shuffling stream
  std::string log_path;                     // per-iteration CSV when set

  void validate() const;
};

/// Linear warmup from peak/25 to peak over the first 30% of the budget,
/// cosine anneal back to peak/25 after. `iteration` is 1-based.
double one_cycle_lr(const TrainConfig& config, long iteration);

/// SGD with the one-cycle schedule. Full mode returns the best-validation
/// checkpoint; partial mode returns the checkpoint at the first evaluation
/// whose val accuracy exceeds the threshold. Non-finite loss raises
/// TrainingError.
RnnModel train(RnnModel model, const grammars::LabeledDataset& dataset, const TrainConfig& config);

/// Trains once per grid learning rate (same init seed), skips divergent
/// runs, returns the model with the best validation accuracy.
RnnModel train_with_grid(const RnnModel& init, const grammars::LabeledDataset& dataset,
                         const TrainConfig& config);

void save_checkpoint(const RnnModel& model, const std::string& path);
RnnModel load_checkpoint(const std::string& path);

}  // namespace rnnrules::nn
