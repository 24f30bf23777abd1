// Copyright 2026 The Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Bit-erasure bookkeeping for digital time-reversal pipelines that buffer k
// samples of m bits each.
//
// Counting model:
//   irreversible_time  erased = k*m             gates = k*m
//   irreversible_fft   erased = k*m + 2*m*k*lg k gates = k*m + m*k*lg k
//   reversible         erased = 0               gates = k*m + 4*k

#pragma once

#include <bit>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "revcomm/core.hpp"

namespace revcomm::erasure {

enum class Variant { kIrreversibleTime, kIrreversibleFft, kReversible };

inline const std::vector<Variant>& all_variants() {
  static const std::vector<Variant> v{Variant::kIrreversibleTime, Variant::kIrreversibleFft, Variant::kReversible};
  return v;
}

inline std::string to_string(Variant v) {
  switch (v) {
    case Variant::kIrreversibleTime: return "irreversible_time";
    case Variant::kIrreversibleFft: return "irreversible_fft";
    default: return "reversible";
  }
}

inline Variant variant_from_string(const std::string& s) {
  for (Variant v : all_variants())
    if (to_string(v) == s) return v;
  throw InvalidInput("unknown pipeline variant '" + s + "'");
}

struct PipelineSpec {
  Variant variant = Variant::kIrreversibleTime;
  std::uint64_t adc_bits = 1;         // m
  std::uint64_t waiting_samples = 1;  // k
};

struct ErasureLedger {
  std::uint64_t erased_bits = 0;
  std::uint64_t gate_count = 0;
  friend bool operator==(const ErasureLedger&, const ErasureLedger&) = default;
};

// Control overhead per buffered sample in the reversible pipeline.
inline constexpr std::uint64_t kReversibleGatesPerSample = 4;

inline void validate(const PipelineSpec& s) {
  require(s.adc_bits >= 1 && s.waiting_samples >= 1, "pipeline: k and m must be >= 1");
  require(s.variant != Variant::kIrreversibleFft || std::has_single_bit(s.waiting_samples),
          "pipeline: the fft variant needs k to be a power of two");
}

inline ErasureLedger count_erasures(const PipelineSpec& s) {
  validate(s);
  const std::uint64_t k = s.waiting_samples, m = s.adc_bits;
  const std::uint64_t reg = k * m;
  switch (s.variant) {
    case Variant::kIrreversibleTime: return {reg, reg};
    case Variant::kIrreversibleFft: {
      const auto lg = static_cast<std::uint64_t>(std::bit_width(k) - 1);
      return {reg + 2 * m * k * lg, reg + m * k * lg};
    }
    default: return {0, reg + kReversibleGatesPerSample * k};
  }
}

struct LedgerRow {
  PipelineSpec spec;
  ErasureLedger ledger;
};

// Every variant at every (k, m); fft rows are skipped for k that are not
// powers of two.
inline std::vector<LedgerRow> sweep_erasures(const std::vector<std::uint64_t>& k_range,
                                             const std::vector<std::uint64_t>& m_range) {
  require(!k_range.empty() && !m_range.empty(), "sweep_erasures: empty range");
  std::vector<LedgerRow> rows;
  for (Variant v : all_variants())
    for (auto k : k_range)
      for (auto m : m_range) {
        const PipelineSpec spec{v, m, k};
        if (v == Variant::kIrreversibleFft && !std::has_single_bit(k)) continue;
        rows.push_back({spec, count_erasures(spec)});
      }
  return rows;
}

inline void write_csv(const std::vector<LedgerRow>& rows, std::ostream& out) {
  out << "variant,k,m,erased_bits,gate_count\n";
  for (const auto& r : rows)
    out << to_string(r.spec.variant) << ',' << r.spec.waiting_samples << ',' << r.spec.adc_bits << ','
        << r.ledger.erased_bits << ',' << r.ledger.gate_count << '\n';
}

// LIFO buffer of k words that stores by XOR into blank cells and unstores by
// XOR-ing the same word back out, so no stored bit is ever discarded.
class ReversibleRegister {
 public:
  ReversibleRegister(std::size_t capacity, unsigned bits)
      : memory_(capacity, 0), mask_(bits >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << bits) - 1) {
    require(bits >= 1, "register: word width must be >= 1");
  }

  void store(std::uint64_t word) {
    if (top_ == memory_.size()) throw InvalidInput("register: overflow");
    require((word & ~mask_) == 0, "register: word wider than the converter");
    memory_[top_++] ^= word;
    ++gates_;
  }

  std::uint64_t unstore() {
    require(top_ > 0, "register: underflow");
    const std::uint64_t word = memory_[--top_];
    memory_[top_] ^= word;
    ++gates_;
    return word;
  }

  bool blank() const {
    for (auto w : memory_)
      if (w) return false;
    return top_ == 0;
  }
  std::size_t size() const { return top_; }
  std::uint64_t erased_bits() const { return 0; }
  std::uint64_t operations() const { return gates_; }

 private:
  std::vector<std::uint64_t> memory_;
  std::uint64_t mask_;
  std::size_t top_ = 0;
  std::uint64_t gates_ = 0;
};

struct RegisterReplay {
  std::vector<std::uint64_t> output;
  ErasureLedger ledger;
  bool memory_blank = false;
};

inline RegisterReplay simulate_reversible_register(const std::vector<std::uint64_t>& samples, std::size_t k,
                                                   unsigned bits) {
  ReversibleRegister reg(k, bits);
  for (auto s : samples) reg.store(s);
  RegisterReplay r;
  r.output.reserve(samples.size());
  while (reg.size()) r.output.push_back(reg.unstore());
  r.ledger = {reg.erased_bits(), reg.operations()};
  r.memory_blank = reg.blank();
  return r;
}

}  // namespace revcomm::erasure
