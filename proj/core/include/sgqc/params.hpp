#ifndef SGQC_PARAMS_HPP
#define SGQC_PARAMS_HPP

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "sgqc/tensor.hpp"

namespace sgqc {

// Named, ordered registry of the learnable tensors of one model, plus Adam
// moment state. The tensors themselves are owned by the network's parameter
// structs; the store holds stable pointers plus a flat offset layout used by
// gradient buffers and the optimizer.
template <typename T>
class ParamStore {
public:
    struct Entry {
        std::string name;
        Tensor<T>* value = nullptr;
        std::size_t offset = 0;  // position in the flat scalar layout
    };

    std::size_t add(std::string name, Tensor<T>* value) {
        if (by_name_.count(name))
            throw Error("duplicate parameter name: " + name);
        Entry e{std::move(name), value, total_};
        total_ += value->size();
        by_name_.emplace(e.name, entries_.size());
        entries_.push_back(std::move(e));
        return entries_.size() - 1;
    }

    const std::vector<Entry>& entries() const { return entries_; }
    Entry& entry(std::size_t i) { return entries_[i]; }
    const Entry& entry(std::size_t i) const { return entries_[i]; }
    std::size_t count() const { return entries_.size(); }
    std::size_t total_scalars() const { return total_; }

    const Entry* find(const std::string& name) const {
        auto it = by_name_.find(name);
        return it == by_name_.end() ? nullptr : &entries_[it->second];
    }

    // Adam state. Moments are lazily sized on first use and always kept in
    // double precision; the step counter increments once per adam_step.
    std::vector<double>& moment1() { return m_; }
    std::vector<double>& moment2() { return v_; }
    std::int64_t step() const { return step_; }
    void set_step(std::int64_t s) { step_ = s; }
    std::int64_t bump_step() { return ++step_; }

    std::uint64_t seed = 0;  // seed the parameters were initialized from

    std::vector<T> snapshot_values() const {
        std::vector<T> out;
        out.reserve(total_);
        for (const auto& e : entries_)
            out.insert(out.end(), e.value->values().begin(), e.value->values().end());
        return out;
    }

    void restore_values(const std::vector<T>& flat) {
        if (flat.size() != total_)
            throw Error("parameter snapshot size mismatch");
        std::size_t pos = 0;
        for (auto& e : entries_) {
            std::copy(flat.begin() + pos, flat.begin() + pos + e.value->size(),
                      e.value->values().begin());
            pos += e.value->size();
        }
    }

    void reset_optimizer_state() {
        m_.clear();
        v_.clear();
        step_ = 0;
    }

private:
    std::vector<Entry> entries_;
    std::unordered_map<std::string, std::size_t> by_name_;
    std::size_t total_ = 0;
    std::vector<double> m_, v_;
    std::int64_t step_ = 0;
};

}  // namespace sgqc

#endif
