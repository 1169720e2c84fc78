// ============================================================================
// ptstl/bitsig.hpp — bit-packed signal evaluation over a fixed dataset
// ============================================================================
//
// The grid search scores millions of candidate formulas against the same
// dataset.  This evaluator packs every trace's Boolean signal into 64-bit
// words (one aligned block per trace) and evaluates formula trees directly
// on the packed representation: Boolean connectives are word operations,
// X^n is a word-level shift, and the windowed operators are short chains of
// shifted copies.  Shifting in zeros from below reproduces the below-0-is-
// false boundary semantics exactly; equality with eval_signal is enforced
// by property tests.
//
// Atom signals are cached per (atom, value), which is where almost all of
// the sharing between grid candidates lives.  Formula templates evaluate
// without substitution: slot values come from a Bindings list.
// ============================================================================

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ptstl/formula.hpp"
#include "ptstl/trace.hpp"

namespace ptstl {

// Slot values supplied at evaluation time, replacing substitution.
class Bindings {
public:
    void set(const Slot* slot, double v) { scalars_.emplace_back(slot, v); }
    void set(const Slot* slot, Window w) { windows_.emplace_back(slot, w); }
    void clear() {
        scalars_.clear();
        windows_.clear();
    }

    double scalar(const Slot* slot) const {
        for (const auto& [s, v] : scalars_)
            if (s == slot) return v;
        throw ValidationError("bindings: no value for slot '" + slot->name + "'");
    }
    Window window(const Slot* slot) const {
        for (const auto& [s, w] : windows_)
            if (s == slot) return w;
        throw ValidationError("bindings: no window for slot '" + slot->name + "'");
    }

private:
    std::vector<std::pair<const Slot*, double>> scalars_;
    std::vector<std::pair<const Slot*, Window>> windows_;
};

class PackedEvaluator {
public:
    using Words = std::vector<std::uint64_t>;

    explicit PackedEvaluator(const Dataset& ds) : ds_(&ds) {
        std::size_t off = 0;
        for (const auto& [tr, labels] : ds.items) {
            Block b;
            b.off = off;
            b.len = tr.length();
            b.words = (b.len + 63) / 64;
            off += b.words;
            blocks_.push_back(b);
        }
        total_words_ = off;
        labels_.assign(total_words_, 0);
        total_points_ = 0;
        for (std::size_t t = 0; t < blocks_.size(); ++t) {
            const auto& bits = ds.items[t].second.bits;
            for (std::size_t k = 0; k < bits.size(); ++k)
                if (bits[k]) set_bit(labels_, blocks_[t], k);
            total_points_ += blocks_[t].len;
        }
        positive_points_ = popcount(labels_);
    }

    std::size_t total_points() const noexcept { return total_points_; }
    const Words& labels() const noexcept { return labels_; }

    Words falses() const { return Words(total_words_, 0); }

    // Evaluates a formula (or a template plus bindings) over every trace.
    Words eval(const Formula& f, const Bindings* b = nullptr) const {
        switch (f.kind) {
            case NodeKind::True: {
                Words out(total_words_, 0);
                for (const auto& blk : blocks_) fill_block(out, blk);
                return out;
            }
            case NodeKind::StateLT:
            case NodeKind::StateGT:
            case NodeKind::CtrlEQ:
                return atom_signal(f, b);
            case NodeKind::Not: {
                Words a = eval(*f.lhs, b);
                for (std::size_t w = 0; w < total_words_; ++w) a[w] = ~a[w];
                for (const auto& blk : blocks_) mask_block(a, blk);
                return a;
            }
            case NodeKind::And: {
                Words a = eval(*f.lhs, b);
                Words r = eval(*f.rhs, b);
                for (std::size_t w = 0; w < total_words_; ++w) a[w] &= r[w];
                return a;
            }
            case NodeKind::Or: {
                Words a = eval(*f.lhs, b);
                Words r = eval(*f.rhs, b);
                for (std::size_t w = 0; w < total_words_; ++w) a[w] |= r[w];
                return a;
            }
            case NodeKind::Shift: {
                Words a = eval(*f.lhs, b);
                Words out(total_words_, 0);
                for (const auto& blk : blocks_) shift_block(out, a, blk, f.shift);
                return out;
            }
            case NodeKind::Prev:
            case NodeKind::Hist: {
                const Window w = resolve_window(f.window, b);
                Words a = eval(*f.lhs, b);
                Words acc(total_words_, 0);
                Words tmp(total_words_, 0);
                bool first = true;
                for (unsigned t = w.b; t <= w.a; ++t) {
                    for (const auto& blk : blocks_) shift_block(tmp, a, blk, t);
                    if (first) {
                        acc = tmp;
                        first = false;
                    } else if (f.kind == NodeKind::Prev) {
                        for (std::size_t i = 0; i < total_words_; ++i) acc[i] |= tmp[i];
                    } else {
                        for (std::size_t i = 0; i < total_words_; ++i) acc[i] &= tmp[i];
                    }
                }
                return acc;
            }
            case NodeKind::Since: {
                const Window w = resolve_window(f.window, b);
                Words p = eval(*f.lhs, b);
                Words q = eval(*f.rhs, b);
                Words acc(total_words_, 0);
                Words p_run(total_words_, 0);  // AND of shifted p so far
                Words tmp(total_words_, 0);
                for (unsigned t = w.b; t <= w.a; ++t) {
                    for (const auto& blk : blocks_) shift_block(tmp, p, blk, t);
                    if (t == w.b)
                        p_run = tmp;
                    else
                        for (std::size_t i = 0; i < total_words_; ++i) p_run[i] &= tmp[i];
                    for (const auto& blk : blocks_) shift_block(tmp, q, blk, t);
                    for (std::size_t i = 0; i < total_words_; ++i) acc[i] |= tmp[i] & p_run[i];
                }
                return acc;
            }
        }
        return falses();
    }

    static void or_into(Words& dst, const Words& src) {
        for (std::size_t w = 0; w < dst.size(); ++w) dst[w] |= src[w];
    }
    static void and_into(Words& dst, const Words& src) {
        for (std::size_t w = 0; w < dst.size(); ++w) dst[w] &= src[w];
    }

    Confusion score(const Words& pred) const {
        Confusion c;
        std::uint64_t tp = 0;
        std::uint64_t p_total = 0;
        for (std::size_t w = 0; w < total_words_; ++w) {
            tp += static_cast<std::uint64_t>(std::popcount(pred[w] & labels_[w]));
            p_total += static_cast<std::uint64_t>(std::popcount(pred[w]));
        }
        c.tp = tp;
        c.fp = p_total - tp;
        c.fn = positive_points_ - tp;
        c.tn = total_points_ - c.tp - c.fp - c.fn;
        return c;
    }

    // Unpacks one trace's bits; used by the equivalence tests.
    BoolSignal unpack(const Words& sig, std::size_t trace_index) const {
        const Block& blk = blocks_.at(trace_index);
        BoolSignal out(blk.len, 0);
        for (std::size_t k = 0; k < blk.len; ++k)
            out[k] = (sig[blk.off + k / 64] >> (k % 64)) & 1u;
        return out;
    }

private:
    struct Block {
        std::size_t off = 0;
        std::size_t words = 0;
        std::size_t len = 0;
    };

    struct AtomKey {
        std::uint8_t kind;
        int var;
        std::uint64_t value_bits;
        bool operator==(const AtomKey& o) const noexcept {
            return kind == o.kind && var == o.var && value_bits == o.value_bits;
        }
    };
    struct AtomKeyHash {
        std::size_t operator()(const AtomKey& k) const noexcept {
            std::uint64_t h = k.value_bits * 0x9e3779b97f4a7c15ull;
            h ^= (static_cast<std::uint64_t>(k.kind) << 32) ^ static_cast<std::uint64_t>(
                     static_cast<std::uint32_t>(k.var));
            h *= 0xbf58476d1ce4e5b9ull;
            return static_cast<std::size_t>(h ^ (h >> 31));
        }
    };

    static std::uint64_t bits_of(double v) {
        std::uint64_t b;
        static_assert(sizeof b == sizeof v);
        std::memcpy(&b, &v, sizeof b);
        return b;
    }

    void set_bit(Words& sig, const Block& blk, std::size_t k) const {
        sig[blk.off + k / 64] |= std::uint64_t{1} << (k % 64);
    }

    void fill_block(Words& sig, const Block& blk) const {
        for (std::size_t w = 0; w < blk.words; ++w) sig[blk.off + w] = ~std::uint64_t{0};
        mask_block(sig, blk);
    }

    void mask_block(Words& sig, const Block& blk) const {
        const std::size_t used = blk.len % 64;
        if (used != 0) sig[blk.off + blk.words - 1] &= (~std::uint64_t{0}) >> (64 - used);
    }

    // dst[k] = src[k - n] within the block, zeros below.
    void shift_block(Words& dst, const Words& src, const Block& blk, unsigned n) const {
        const std::size_t ws = n / 64;
        const unsigned rs = n % 64;
        for (std::size_t w = blk.words; w-- > 0;) {
            std::uint64_t v = 0;
            if (w >= ws) {
                v = src[blk.off + w - ws] << rs;
                if (rs != 0 && w > ws) v |= src[blk.off + w - ws - 1] >> (64 - rs);
            }
            dst[blk.off + w] = v;
        }
        mask_block(dst, blk);
    }

    Window resolve_window(const WindowParam& w, const Bindings* b) const {
        if (!w.is_slot()) return w.win;
        if (!b) throw ValidationError("packed eval: window slot without bindings");
        return b->window(w.slot.get());
    }

    double resolve_scalar(const Param& p, const Bindings* b) const {
        if (!p.is_slot()) return p.value;
        if (!b) throw ValidationError("packed eval: parameter slot without bindings");
        return b->scalar(p.slot.get());
    }

    Words atom_signal(const Formula& f, const Bindings* b) const {
        const double value = resolve_scalar(f.param, b);
        const AtomKey key{static_cast<std::uint8_t>(f.kind), f.var, bits_of(value)};
        auto it = atom_cache_.find(key);
        if (it != atom_cache_.end()) return it->second;

        Words out(total_words_, 0);
        for (std::size_t t = 0; t < blocks_.size(); ++t) {
            const Block& blk = blocks_[t];
            const Trace& tr = ds_->items[t].first;
            const auto& col = f.kind == NodeKind::CtrlEQ
                                  ? tr.controls[static_cast<std::size_t>(f.var)]
                                  : tr.states[static_cast<std::size_t>(f.var)];
            for (std::size_t k = 0; k < blk.len; ++k) {
                bool bit = false;
                if (f.kind == NodeKind::StateLT)
                    bit = col[k] < value;
                else if (f.kind == NodeKind::StateGT)
                    bit = col[k] > value;
                else
                    bit = col[k] == value;
                if (bit) set_bit(out, blk, k);
            }
        }
        atom_cache_.emplace(key, out);
        return out;
    }

    const Dataset* ds_;
    std::vector<Block> blocks_;
    std::size_t total_words_ = 0;
    std::size_t total_points_ = 0;
    std::uint64_t positive_points_ = 0;
    Words labels_;
    mutable std::unordered_map<AtomKey, Words, AtomKeyHash> atom_cache_;

    std::uint64_t popcount(const Words& w) const {
        std::uint64_t n = 0;
        for (auto x : w) n += static_cast<std::uint64_t>(std::popcount(x));
        return n;
    }
};

}  // namespace ptstl
