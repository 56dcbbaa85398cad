#include "qtoken/sparse_state.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qtoken {

namespace {

constexpr double kEmptyBranch = 1e-18;

void check_qubits(int n) {
    if (n < 1 || n > kMaxQubits) {
        throw std::invalid_argument("qubit count " + std::to_string(n) + " outside [1, " +
                                    std::to_string(kMaxQubits) + "]");
    }
}

std::uint64_t field_mask(int width) {
    return width >= 64 ? ~0ULL : ((1ULL << width) - 1);
}

void check_layout(const SparseState& state, const RegisterLayout& layout) {
    if (layout.total_width() != state.num_qubits()) {
        throw std::invalid_argument("layout covers " + std::to_string(layout.total_width()) +
                                    " qubits but state has " +
                                    std::to_string(state.num_qubits()));
    }
}

std::pair<const Register*, const Register*> swap_pair(const RegisterLayout& layout,
                                                      std::string_view a, std::string_view b) {
    const Register& ra = layout.at(a);
    const Register& rb = layout.at(b);
    if (ra.width != rb.width) {
        throw std::invalid_argument("swap registers '" + ra.name + "' and '" + rb.name +
                                    "' differ in width");
    }
    if (ra.name == rb.name) throw std::invalid_argument("swap of a register with itself");
    return {&ra, &rb};
}

std::uint64_t swapped_index(std::uint64_t idx, const Register& a, const Register& b, int total) {
    const std::uint64_t va = register_value(idx, a, total);
    const std::uint64_t vb = register_value(idx, b, total);
    idx = with_register_value(idx, a, total, vb);
    return with_register_value(idx, b, total, va);
}

// Index-sorted copy of `entries` with the two register fields exchanged.
std::vector<SparseState::Entry> swapped_entries(std::span<const SparseState::Entry> entries,
                                                const Register& a, const Register& b, int total) {
    std::vector<SparseState::Entry> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back({swapped_index(e.index, a, b, total), e.amplitude});
    std::sort(out.begin(), out.end(),
              [](const auto& x, const auto& y) { return x.index < y.index; });
    return out;
}

std::size_t sample_index(std::span<const double> weights, double total, Rng& rng) {
    const double u = uniform01(rng) * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        acc += weights[i];
        if (u < acc) return i;
    }
    // Rounding can leave u just above the accumulated total.
    for (std::size_t i = weights.size(); i-- > 0;) {
        if (weights[i] > 0.0) return i;
    }
    throw std::logic_error("sampling from an all-zero distribution");
}

}  // namespace

// ---------------------------------------------------------------------------
// SparseState

SparseState SparseState::basis(int num_qubits, std::uint64_t index) {
    check_qubits(num_qubits);
    if (index > field_mask(num_qubits)) throw std::out_of_range("basis index out of range");
    return SparseState(num_qubits, {{index, Amplitude{1.0, 0.0}}});
}

SparseState SparseState::from_entries(int num_qubits, std::vector<Entry> entries) {
    check_qubits(num_qubits);
    const std::uint64_t max_index = field_mask(num_qubits);
    for (const auto& e : entries) {
        if (e.index > max_index) throw std::out_of_range("basis index out of range");
    }
    std::sort(entries.begin(), entries.end(),
              [](const Entry& x, const Entry& y) { return x.index < y.index; });

    std::vector<Entry> merged;
    merged.reserve(entries.size());
    for (const auto& e : entries) {
        if (!merged.empty() && merged.back().index == e.index) {
            merged.back().amplitude += e.amplitude;
        } else {
            merged.push_back(e);
        }
    }

    auto normalize = [](std::vector<Entry>& v) {
        double norm2 = 0.0;
        for (const auto& e : v) norm2 += std::norm(e.amplitude);
        if (!(norm2 > 0.0) || !std::isfinite(norm2)) {
            throw std::invalid_argument("cannot normalize a zero or non-finite vector");
        }
        const double inv = 1.0 / std::sqrt(norm2);
        for (auto& e : v) e.amplitude *= inv;
    };

    normalize(merged);
    std::erase_if(merged, [](const Entry& e) { return std::abs(e.amplitude) < kPruneThreshold; });
    normalize(merged);
    return SparseState(num_qubits, std::move(merged));
}

SparseState SparseState::from_dense(int num_qubits, std::span<const Amplitude> amplitudes) {
    check_qubits(num_qubits);
    if (num_qubits > 30 || amplitudes.size() != (std::size_t{1} << num_qubits)) {
        throw std::invalid_argument("dense amplitude vector has the wrong length");
    }
    std::vector<Entry> entries;
    for (std::size_t i = 0; i < amplitudes.size(); ++i) {
        if (amplitudes[i] != Amplitude{}) entries.push_back({i, amplitudes[i]});
    }
    return from_entries(num_qubits, std::move(entries));
}

Amplitude SparseState::amplitude(std::uint64_t index) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), index,
                               [](const Entry& e, std::uint64_t i) { return e.index < i; });
    if (it != entries_.end() && it->index == index) return it->amplitude;
    return {};
}

double SparseState::norm_squared() const {
    double s = 0.0;
    for (const auto& e : entries_) s += std::norm(e.amplitude);
    return s;
}

std::vector<Amplitude> SparseState::to_dense() const {
    if (num_qubits_ > 30) throw std::length_error("state too wide for a dense vector");
    std::vector<Amplitude> out(std::size_t{1} << num_qubits_);
    for (const auto& e : entries_) out[e.index] = e.amplitude;
    return out;
}

// ---------------------------------------------------------------------------
// RegisterLayout

RegisterLayout::RegisterLayout(std::initializer_list<std::pair<std::string, int>> regs) {
    for (const auto& [name, width] : regs) add(name, width);
}

RegisterLayout& RegisterLayout::add(std::string name, int width) {
    if (width < 1) throw std::invalid_argument("register width must be positive");
    if (contains(name)) throw std::invalid_argument("duplicate register name '" + name + "'");
    if (total_width_ + width > kMaxQubits) throw std::invalid_argument("layout too wide");
    registers_.push_back({std::move(name), total_width_, width});
    total_width_ += width;
    return *this;
}

RegisterLayout RegisterLayout::concat(const RegisterLayout& other) const {
    RegisterLayout out = *this;
    for (const auto& r : other.registers_) out.add(r.name, r.width);
    return out;
}

const Register& RegisterLayout::at(std::string_view name) const {
    for (const auto& r : registers_) {
        if (r.name == name) return r;
    }
    throw std::out_of_range("no register named '" + std::string(name) + "'");
}

bool RegisterLayout::contains(std::string_view name) const {
    return std::any_of(registers_.begin(), registers_.end(),
                       [&](const Register& r) { return r.name == name; });
}

std::uint64_t register_value(std::uint64_t index, const Register& reg, int total) {
    const int shift = total - reg.offset - reg.width;
    return (index >> shift) & field_mask(reg.width);
}

std::uint64_t with_register_value(std::uint64_t index, const Register& reg, int total,
                                  std::uint64_t value) {
    const int shift = total - reg.offset - reg.width;
    const std::uint64_t mask = field_mask(reg.width) << shift;
    return (index & ~mask) | ((value << shift) & mask);
}

// ---------------------------------------------------------------------------
// Operations

SparseState tensor(const SparseState& a, const SparseState& b) {
    const int n = a.num_qubits() + b.num_qubits();
    check_qubits(n);
    std::vector<SparseState::Entry> out;
    out.reserve(a.nonzeros() * b.nonzeros());
    // Both inputs are sorted, so the shifted products come out sorted as well.
    for (const auto& x : a.entries()) {
        for (const auto& y : b.entries()) {
            out.push_back({(x.index << b.num_qubits()) | y.index, x.amplitude * y.amplitude});
        }
    }
    return SparseState::from_entries(n, std::move(out));
}

Amplitude inner_product(const SparseState& a, const SparseState& b) {
    if (a.num_qubits() != b.num_qubits()) {
        throw std::invalid_argument("inner product of states with different widths");
    }
    Amplitude acc{};
    auto ia = a.entries().begin();
    auto ib = b.entries().begin();
    while (ia != a.entries().end() && ib != b.entries().end()) {
        if (ia->index < ib->index) {
            ++ia;
        } else if (ib->index < ia->index) {
            ++ib;
        } else {
            acc += std::conj(ia->amplitude) * ib->amplitude;
            ++ia;
            ++ib;
        }
    }
    return acc;
}

double fidelity(const SparseState& a, const SparseState& b) {
    return std::norm(inner_product(a, b));
}

std::vector<std::pair<std::uint64_t, double>> register_distribution(const SparseState& state,
                                                                    const RegisterLayout& layout,
                                                                    std::string_view reg) {
    check_layout(state, layout);
    const Register& r = layout.at(reg);
    std::vector<std::pair<std::uint64_t, double>> probs;
    probs.reserve(state.nonzeros());
    for (const auto& e : state.entries()) {
        probs.emplace_back(register_value(e.index, r, state.num_qubits()), std::norm(e.amplitude));
    }
    std::sort(probs.begin(), probs.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
    std::vector<std::pair<std::uint64_t, double>> merged;
    for (const auto& p : probs) {
        if (!merged.empty() && merged.back().first == p.first) {
            merged.back().second += p.second;
        } else {
            merged.push_back(p);
        }
    }
    return merged;
}

MeasureResult measure_register(const SparseState& state, const RegisterLayout& layout,
                               std::string_view reg, Rng& rng) {
    const auto dist = register_distribution(state, layout, reg);
    std::vector<double> weights;
    weights.reserve(dist.size());
    double total = 0.0;
    for (const auto& [v, p] : dist) {
        weights.push_back(p);
        total += p;
    }
    const std::uint64_t value = dist[sample_index(weights, total, rng)].first;

    const Register& r = layout.at(reg);
    std::vector<SparseState::Entry> kept;
    for (const auto& e : state.entries()) {
        if (register_value(e.index, r, state.num_qubits()) == value) kept.push_back(e);
    }
    return {value, SparseState::from_entries(state.num_qubits(), std::move(kept))};
}

std::uint64_t measure_all(const SparseState& state, Rng& rng) {
    const double u = uniform01(rng);
    double acc = 0.0;
    const auto entries = state.entries();
    for (const auto& e : entries) {
        acc += std::norm(e.amplitude);
        if (u < acc) return e.index;
    }
    return entries.back().index;
}

SparseState apply_register_swap(const SparseState& state, const RegisterLayout& layout,
                                std::string_view reg_a, std::string_view reg_b) {
    check_layout(state, layout);
    const auto [a, b] = swap_pair(layout, reg_a, reg_b);
    // A permutation of basis states: reorder only, so amplitudes are carried over exactly.
    auto entries = swapped_entries(state.entries(), *a, *b, state.num_qubits());
    std::sort(entries.begin(), entries.end(),
              [](const SparseState::Entry& x, const SparseState::Entry& y) { return x.index < y.index; });
    return SparseState(state.num_qubits(), std::move(entries));
}

double swap_probability(const SparseState& state, const RegisterLayout& layout,
                        std::string_view reg_a, std::string_view reg_b) {
    check_layout(state, layout);
    const auto [a, b] = swap_pair(layout, reg_a, reg_b);
    // ||(v - SWAP v)/2||^2, summed from amplitude differences so that a
    // symmetric state gives exactly 0. An entry whose partner is absent
    // appears once in v and once in SWAP v.
    double p = 0.0;
    for (const auto& e : state.entries()) {
        const std::uint64_t s = swapped_index(e.index, *a, *b, state.num_qubits());
        const Amplitude partner = state.amplitude(s);
        const double d = std::norm(e.amplitude - partner);
        p += (partner == Amplitude{} ? 2.0 : 1.0) * d;
    }
    return std::clamp(p / 4.0, 0.0, 1.0);
}

SwapBranch swap_branch(const SparseState& state, const RegisterLayout& layout,
                       std::string_view reg_a, std::string_view reg_b, int bit) {
    check_layout(state, layout);
    if (bit != 0 && bit != 1) throw std::invalid_argument("swap outcome must be 0 or 1");
    const auto [a, b] = swap_pair(layout, reg_a, reg_b);
    const auto swapped = swapped_entries(state.entries(), *a, *b, state.num_qubits());
    const double sign = bit == 0 ? 1.0 : -1.0;

    std::vector<SparseState::Entry> out;
    out.reserve(state.nonzeros() + swapped.size());
    auto iv = state.entries().begin();
    auto is = swapped.begin();
    while (iv != state.entries().end() || is != swapped.end()) {
        if (is == swapped.end() || (iv != state.entries().end() && iv->index < is->index)) {
            out.push_back({iv->index, 0.5 * iv->amplitude});
            ++iv;
        } else if (iv == state.entries().end() || is->index < iv->index) {
            out.push_back({is->index, 0.5 * sign * is->amplitude});
            ++is;
        } else {
            out.push_back({iv->index, 0.5 * (iv->amplitude + sign * is->amplitude)});
            ++iv;
            ++is;
        }
    }
    double p = 0.0;
    for (const auto& e : out) p += std::norm(e.amplitude);
    if (p < kEmptyBranch) return {0.0, std::nullopt};
    return {std::min(p, 1.0), SparseState::from_entries(state.num_qubits(), std::move(out))};
}

SwapOutcome swap_test(const SparseState& state, const RegisterLayout& layout,
                      std::string_view reg_a, std::string_view reg_b, Rng& rng) {
    const double p1 = swap_probability(state, layout, reg_a, reg_b);
    int bit = uniform01(rng) < p1 ? 1 : 0;
    auto branch = swap_branch(state, layout, reg_a, reg_b, bit);
    if (!branch.post_state) {
        // Only reachable when the sampled branch carries ~1e-18 of the mass.
        bit = 1 - bit;
        branch = swap_branch(state, layout, reg_a, reg_b, bit);
    }
    return {bit, std::move(*branch.post_state)};
}

SparseState random_state(int num_qubits, Rng& rng) {
    check_qubits(num_qubits);
    if (num_qubits > 24) throw std::invalid_argument("random_state limited to 24 qubits");
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<SparseState::Entry> entries(std::size_t{1} << num_qubits);
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const double re = gauss(rng);
        const double im = gauss(rng);
        entries[i] = {i, Amplitude{re, im}};
    }
    return SparseState::from_entries(num_qubits, std::move(entries));
}

}  // namespace qtoken
