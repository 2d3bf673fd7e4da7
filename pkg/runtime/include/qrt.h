// Quantum runtime for rewritten kernels: instruction IR, a statevector
// simulator, circuit transforms (controlled / adjoint), deterministic
// exact-probability counts, and the QuantumKernel base template whose
// sub-types are generated by the rewriter.
//
// Conventions: qubit k is bit k of the state index (qubit 0 is the least
// significant bit).  CX operands are {control, target}.  Counts bitstrings
// order measured qubits ascending, leftmost character first.

#ifndef QRT_H
#define QRT_H

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <iostream>
#include <map>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace qrt {

using amplitude = std::complex<double>;

constexpr int MAX_QUBITS = 16;

struct Instruction {
  std::string name;
  std::vector<int> bits;      // gate operands; CX: {control, target}
  std::vector<double> params; // rotation angles
  std::vector<int> controls;  // extra controls added by ctrl transforms
  bool dagger = false;
};

using InstructionPtr = std::shared_ptr<Instruction>;

class CompositeInstruction {
 public:
  void addInstruction(const InstructionPtr& inst) { insts_.push_back(inst); }
  void addInstructions(std::initializer_list<InstructionPtr> list) {
    insts_.insert(insts_.end(), list.begin(), list.end());
  }
  void addInstructions(const std::vector<InstructionPtr>& list) {
    insts_.insert(insts_.end(), list.begin(), list.end());
  }
  const std::vector<InstructionPtr>& instructions() const { return insts_; }
  std::size_t size() const { return insts_.size(); }

 private:
  std::vector<InstructionPtr> insts_;
};

using CompositePtr = std::shared_ptr<CompositeInstruction>;

class IRProvider {
 public:
  InstructionPtr createInstruction(const std::string& name,
                                   std::vector<int> bits,
                                   std::vector<double> params = {}) {
    auto inst = std::make_shared<Instruction>();
    inst->name = name;
    inst->bits = std::move(bits);
    inst->params = std::move(params);
    return inst;
  }
};

inline std::shared_ptr<IRProvider> getIRProvider() {
  static auto provider = std::make_shared<IRProvider>();
  return provider;
}

// ---------------------------------------------------------------------------
// Run configuration (filled in by the rewriter's predefines block).

inline int& shots() {
  static int value = 1024;
  return value;
}

inline std::string& accelerator_name() {
  static std::string value = "simulator";
  return value;
}

// Negative: deterministic exact-probability counts (the default).
// Non-negative: counts are sampled with this seed.
inline long& sampling_seed() {
  static long value = -1;
  return value;
}

inline bool configure(const std::string& backend, int shot_count) {
  accelerator_name() = backend;
  shots() = shot_count;
  return true;
}

// ---------------------------------------------------------------------------
// Qubit register: shared simulator state so copies alias one another.

struct QregState {
  int n = 0;
  std::vector<amplitude> amps;
  std::map<std::string, int> counts;
};

class qreg {
 public:
  qreg() : state_(std::make_shared<QregState>()) {}
  explicit qreg(int n) : state_(std::make_shared<QregState>()) {
    if (n < 0 || n > MAX_QUBITS)
      throw std::invalid_argument("qreg size must be 0..16 qubits");
    state_->n = n;
    state_->amps.assign(std::size_t(1) << n, amplitude(0.0, 0.0));
    if (n >= 0) state_->amps[0] = amplitude(1.0, 0.0);
  }
  int size() const { return state_->n; }
  std::map<std::string, int>& counts() { return state_->counts; }
  const std::map<std::string, int>& counts() const { return state_->counts; }
  std::shared_ptr<QregState> state() const { return state_; }
  void print(std::ostream& os = std::cout) const {
    if (!state_->counts.empty()) {
      for (const auto& kv : state_->counts)
        os << kv.first << " : " << kv.second << "\n";
      return;
    }
    for (std::size_t i = 0; i < state_->amps.size(); i++) {
      os << i << " : (" << state_->amps[i].real() << ", "
         << state_->amps[i].imag() << ")\n";
    }
  }

 private:
  std::shared_ptr<QregState> state_;
};

inline qreg qalloc(int n) { return qreg(n); }

// ---------------------------------------------------------------------------
// Statevector simulator.

inline std::array<amplitude, 4> gate_matrix(const std::string& name,
                                            const std::vector<double>& params,
                                            bool dagger) {
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  const amplitude i01(0.0, 1.0);
  std::array<amplitude, 4> m;
  if (name == "X") {
    m = {amplitude(0), amplitude(1), amplitude(1), amplitude(0)};
  } else if (name == "Y") {
    m = {amplitude(0), -i01, i01, amplitude(0)};
  } else if (name == "Z") {
    m = {amplitude(1), amplitude(0), amplitude(0), amplitude(-1)};
  } else if (name == "H") {
    m = {amplitude(inv_sqrt2), amplitude(inv_sqrt2), amplitude(inv_sqrt2),
         amplitude(-inv_sqrt2)};
  } else if (name == "S") {
    m = {amplitude(1), amplitude(0), amplitude(0), i01};
  } else if (name == "T") {
    m = {amplitude(1), amplitude(0), amplitude(0),
         std::exp(i01 * (M_PI / 4.0))};
  } else if (name == "Rx" || name == "Ry" || name == "Rz") {
    if (params.empty())
      throw std::invalid_argument("rotation gate requires an angle");
    double theta = params[0];
    double c = std::cos(theta / 2.0), s = std::sin(theta / 2.0);
    if (name == "Rx")
      m = {amplitude(c), -i01 * s, -i01 * s, amplitude(c)};
    else if (name == "Ry")
      m = {amplitude(c), amplitude(-s), amplitude(s), amplitude(c)};
    else
      m = {std::exp(-i01 * (theta / 2.0)), amplitude(0), amplitude(0),
           std::exp(i01 * (theta / 2.0))};
  } else {
    throw std::invalid_argument("unknown gate '" + name + "'");
  }
  if (dagger) {
    // conjugate transpose
    m = {std::conj(m[0]), std::conj(m[2]), std::conj(m[1]), std::conj(m[3])};
  }
  return m;
}

inline void apply_single(std::vector<amplitude>& amps, int target,
                         const std::array<amplitude, 4>& m,
                         std::uint32_t ctrl_mask) {
  const std::size_t dim = amps.size();
  const std::size_t bit = std::size_t(1) << target;
  for (std::size_t i = 0; i < dim; i++) {
    if (i & bit) continue;
    if ((i & ctrl_mask) != ctrl_mask) continue;
    const amplitude a0 = amps[i];
    const amplitude a1 = amps[i | bit];
    amps[i] = m[0] * a0 + m[1] * a1;
    amps[i | bit] = m[2] * a0 + m[3] * a1;
  }
}

inline void apply_instruction(std::vector<amplitude>& amps,
                              const Instruction& inst, int n_qubits) {
  auto check = [n_qubits](int q) {
    if (q < 0 || q >= n_qubits)
      throw std::out_of_range("qubit index out of range");
  };
  std::uint32_t ctrl_mask = 0;
  for (int c : inst.controls) {
    check(c);
    ctrl_mask |= std::uint32_t(1) << c;
  }
  if (inst.name == "Measure") return;  // marks the qubit; no state change
  if (inst.name == "CX") {
    if (inst.bits.size() != 2)
      throw std::invalid_argument("CX expects {control, target}");
    check(inst.bits[0]);
    check(inst.bits[1]);
    ctrl_mask |= std::uint32_t(1) << inst.bits[0];
    apply_single(amps, inst.bits[1], gate_matrix("X", {}, false), ctrl_mask);
    return;
  }
  if (inst.bits.size() != 1)
    throw std::invalid_argument("gate '" + inst.name +
                                "' expects one operand");
  check(inst.bits[0]);
  apply_single(amps, inst.bits[0],
               gate_matrix(inst.name, inst.params, inst.dagger), ctrl_mask);
}

inline std::vector<int> measured_qubits(const CompositeInstruction& program) {
  std::vector<int> measured;
  for (const auto& inst : program.instructions()) {
    if (inst->name != "Measure") continue;
    for (int q : inst->bits)
      if (std::find(measured.begin(), measured.end(), q) == measured.end())
        measured.push_back(q);
  }
  std::sort(measured.begin(), measured.end());
  return measured;
}

// Fresh run from |0...0>; Measure instructions mark qubits without
// collapsing the state.
inline std::vector<amplitude> simulate(const CompositeInstruction& program,
                                       int n_qubits) {
  if (n_qubits < 0 || n_qubits > MAX_QUBITS)
    throw std::invalid_argument("simulator supports 0..16 qubits");
  std::vector<amplitude> amps(std::size_t(1) << n_qubits, amplitude(0.0));
  amps[0] = amplitude(1.0);
  for (const auto& inst : program.instructions())
    apply_instruction(amps, *inst, n_qubits);
  return amps;
}

// Deterministic counts: round(P(bitstring) * shots) over measured qubits.
inline std::map<std::string, int> exact_counts(
    const std::vector<amplitude>& amps, const std::vector<int>& measured,
    int shot_count) {
  std::map<std::string, int> counts;
  if (measured.empty()) return counts;
  std::map<std::string, double> probs;
  for (std::size_t i = 0; i < amps.size(); i++) {
    const double p = std::norm(amps[i]);
    if (p == 0.0) continue;
    std::string key;
    key.reserve(measured.size());
    for (int q : measured)
      key.push_back((i >> q) & 1 ? '1' : '0');
    probs[key] += p;
  }
  for (const auto& kv : probs) {
    const int c = (int)std::lround(kv.second * shot_count);
    if (c > 0) counts[kv.first] = c;
  }
  return counts;
}

// Sampling alternative to exact_counts, reproducible for a fixed seed.
inline std::map<std::string, int> sampled_counts(
    const std::vector<amplitude>& amps, const std::vector<int>& measured,
    int shot_count, long seed) {
  std::map<std::string, int> counts;
  if (measured.empty()) return counts;
  std::mt19937_64 rng((std::uint64_t)seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  for (int shot = 0; shot < shot_count; shot++) {
    double r = uniform(rng);
    std::size_t picked = 0;
    for (std::size_t i = 0; i < amps.size(); i++) {
      r -= std::norm(amps[i]);
      if (r <= 0.0) {
        picked = i;
        break;
      }
    }
    std::string key;
    key.reserve(measured.size());
    for (int q : measured)
      key.push_back((picked >> q) & 1 ? '1' : '0');
    counts[key]++;
  }
  return counts;
}

class Accelerator {
 public:
  explicit Accelerator(std::string name) : name_(std::move(name)) {}
  const std::string& name() const { return name_; }

  // Applies the program to the register's current state and records counts
  // for the measured qubits.
  void execute(qreg q, const CompositePtr& program) {
    auto st = q.state();
    for (const auto& inst : program->instructions())
      apply_instruction(st->amps, *inst, st->n);
    const auto measured = measured_qubits(*program);
    st->counts = sampling_seed() >= 0
                     ? sampled_counts(st->amps, measured, shots(),
                                      sampling_seed())
                     : exact_counts(st->amps, measured, shots());
  }

 private:
  std::string name_;
};

inline std::shared_ptr<Accelerator> getAccelerator(const std::string& name) {
  return std::make_shared<Accelerator>(name);
}

// ---------------------------------------------------------------------------
// Circuit transforms.

inline InstructionPtr clone_instruction(const Instruction& inst) {
  return std::make_shared<Instruction>(inst);
}

// Reversed order; rotation angles negated; S and T get dagger flags;
// X, Y, Z, H, CX are self-inverse.  Measure is non-unitary and rejected.
inline CompositePtr adjoint_transform(const CompositeInstruction& program) {
  auto out = std::make_shared<CompositeInstruction>();
  const auto& insts = program.instructions();
  for (auto it = insts.rbegin(); it != insts.rend(); ++it) {
    const auto& inst = **it;
    if (inst.name == "Measure")
      throw std::runtime_error(
          "cannot take the adjoint of a circuit containing Measure");
    auto copy = clone_instruction(inst);
    if (inst.name == "Rx" || inst.name == "Ry" || inst.name == "Rz")
      copy->params[0] = -copy->params[0];
    else if (inst.name == "S" || inst.name == "T")
      copy->dagger = !copy->dagger;
    out->addInstruction(copy);
  }
  return out;
}

// Every instruction gains the control qubit; the simulator applies the gate
// only where all controls are 1 (CX thus becomes a Toffoli-like operation).
inline CompositePtr ctrl_transform(const CompositeInstruction& program,
                                   int ctrl_qubit) {
  auto out = std::make_shared<CompositeInstruction>();
  for (const auto& inst : program.instructions()) {
    if (inst->name == "Measure")
      throw std::runtime_error(
          "cannot control a circuit containing Measure");
    for (int q : inst->bits)
      if (q == ctrl_qubit)
        throw std::invalid_argument(
            "control qubit collides with an instruction operand");
    for (int q : inst->controls)
      if (q == ctrl_qubit)
        throw std::invalid_argument(
            "control qubit collides with an existing control");
    auto copy = clone_instruction(*inst);
    copy->controls.push_back(ctrl_qubit);
    out->addInstruction(copy);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Base template for rewritten kernels.  Sub-types build _parent_kernel in
// their destructor and submit it unless constructed as a nested kernel.

template <typename Derived, typename... Args>
class QuantumKernel {
 public:
  QuantumKernel(Args... args)
      : args_tuple(args...),
        _parent_kernel(std::make_shared<CompositeInstruction>()) {}

  QuantumKernel(CompositePtr parent, Args... args)
      : args_tuple(args...), _parent_kernel(std::move(parent)),
        nested_(true) {}

  virtual ~QuantumKernel() = default;

  bool is_nested() const { return nested_; }

  // Collects the instructions the derived kernel would add, without
  // submitting them to a backend.
  static CompositePtr materialize(Args... args) {
    auto child = std::make_shared<CompositeInstruction>();
    { Derived nested(child, args...); }
    return child;
  }

  static void adjoint(CompositePtr parent, Args... args) {
    parent->addInstructions(
        adjoint_transform(*materialize(args...))->instructions());
  }

  static void ctrl(CompositePtr parent, int ctrl_qubit, Args... args) {
    parent->addInstructions(
        ctrl_transform(*materialize(args...), ctrl_qubit)->instructions());
  }

 protected:
  std::tuple<Args...> args_tuple;
  CompositePtr _parent_kernel;

 private:
  bool nested_ = false;
};

}  // namespace qrt

using qrt::QuantumKernel;
using qrt::qalloc;
using qrt::qreg;

#endif  // QRT_H
