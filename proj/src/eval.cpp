#include "oca/eval.hpp"

#include <algorithm>
#include <unordered_map>

namespace oca {

void LassoDataWord::check() const {
  if (loop.empty()) throw ArgumentError("data word loop is empty");
  if (drift < 0) throw ArgumentError("negative drift");
  for (const auto* part : {&prefix, &loop})
    for (const auto& p : *part)
      if (p.value < 0) throw ArgumentError("negative counter value in data word");
}

DataPoint LassoDataWord::at(std::size_t i) const {
  if (i < prefix.size()) return prefix[i];
  std::size_t k = (i - prefix.size()) / loop.size(), j = (i - prefix.size()) % loop.size();
  DataPoint p = loop[j];
  p.value += static_cast<Value>(k) * drift;
  return p;
}

namespace {

// Comparisons are invariant under shifting every value and register by
// the same amount, so a loop position k rounds in is evaluated at round 0
// with registers shifted down by k * drift.  Inside the loop every value is
// at least `floor_`, hence registers below it only matter as "below".
class Evaluator {
public:
  explicit Evaluator(const LassoDataWord& w) : w_(w) {
    floor_ = std::min_element(w.loop.begin(), w.loop.end(), [](auto& a, auto& b) { return a.value < b.value; })->value;
  }

  bool eval(std::size_t i, RegisterAssignment nu, const Formula& f) {
    std::size_t p = w_.prefix.size(), l = w_.loop.size();
    if (i >= p + l) {
      std::size_t k = (i - p) / l;
      i = p + (i - p) % l;
      for (auto& [_, v] : nu) v -= static_cast<Value>(k) * w_.drift;
    }
    if (i >= p) clamp(nu);
    return at(i, nu, f);
  }

private:
  const LassoDataWord& w_;
  Value floor_ = 0;

  struct Key {
    const FormulaNode* node;
    std::size_t pos;
    std::vector<Value> regs;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      std::size_t h = std::hash<const void*>()(k.node) * 31 + k.pos;
      for (Value v : k.regs) h = h * 1000003 + std::hash<Value>()(v);
      return h;
    }
  };
  std::unordered_map<Key, bool, KeyHash> memo_;
  std::unordered_map<const FormulaNode*, std::vector<std::string>> free_;

  void clamp(RegisterAssignment& nu) const {
    for (auto& [_, v] : nu) v = std::max(v, floor_ - 1);
  }

  Value value(std::size_t i) const { return i < w_.prefix.size() ? w_.prefix[i].value : w_.loop[i - w_.prefix.size()].value; }
  const std::set<std::string>& props(std::size_t i) const {
    return i < w_.prefix.size() ? w_.prefix[i].props : w_.loop[i - w_.prefix.size()].props;
  }

  // Successor in the reduced space.
  std::pair<std::size_t, RegisterAssignment> succ(std::size_t i, RegisterAssignment nu) const {
    std::size_t p = w_.prefix.size(), l = w_.loop.size();
    if (i + 1 < p + l) {
      if (i + 1 >= p) clamp(nu);
      return {i + 1, std::move(nu)};
    }
    for (auto& [_, v] : nu) v -= w_.drift;
    clamp(nu);
    return {p, std::move(nu)};
  }

  const std::vector<std::string>& free_of(const Formula& f) {
    auto it = free_.find(f.get());
    if (it != free_.end()) return it->second;
    auto regs = free_registers(f);
    return free_[f.get()] = std::vector<std::string>(regs.begin(), regs.end());
  }

  Key key(std::size_t i, const RegisterAssignment& nu, const Formula& f) {
    Key k{f.get(), i, {}};
    for (const auto& r : free_of(f)) {
      auto it = nu.find(r);
      if (it == nu.end()) throw ArgumentError("register '" + r + "' has no value");
      k.regs.push_back(it->second);
    }
    return k;
  }

  bool at(std::size_t i, const RegisterAssignment& nu, const Formula& f) {
    using K = FormulaKind;
    switch (f->kind) {
    case K::True: return true;
    case K::False: return false;
    case K::Prop: return props(i).count(f->name) > 0;
    case K::RegTest: {
      auto it = nu.find(f->name);
      if (it == nu.end()) throw ArgumentError("register '" + f->name + "' has no value");
      return compare(value(i), f->cmp, it->second);
    }
    case K::Not: return !at(i, nu, f->lhs);
    case K::And: return at(i, nu, f->lhs) && at(i, nu, f->rhs);
    case K::Or: return at(i, nu, f->lhs) || at(i, nu, f->rhs);
    default: break;
    }
    Key k = key(i, nu, f);
    if (auto it = memo_.find(k); it != memo_.end()) return it->second;
    bool r = false;
    switch (f->kind) {
    case K::Next: {
      auto [j, mu] = succ(i, nu);
      r = at(j, mu, f->lhs);
      break;
    }
    case K::Freeze: {
      auto mu = nu;
      mu[f->name] = value(i);
      r = at(i, mu, f->lhs);
      break;
    }
    case K::Until:
    case K::Release: {
      bool is_until = f->kind == K::Until;
      // Walk the successor chain until the reduced state repeats.
      std::set<std::pair<std::size_t, std::vector<Value>>> seen;
      std::size_t j = i;
      RegisterAssignment mu = nu;
      r = !is_until;
      while (seen.insert({j, key(j, mu, f).regs}).second) {
        if (is_until) {
          if (at(j, mu, f->rhs)) { r = true; break; }
          if (!at(j, mu, f->lhs)) { r = false; break; }
        } else {
          if (!at(j, mu, f->rhs)) { r = false; break; }
          if (at(j, mu, f->lhs)) { r = true; break; }
        }
        std::tie(j, mu) = succ(j, std::move(mu));
      }
      break;
    }
    default: break;
    }
    memo_[k] = r;
    return r;
  }
};

} // namespace

bool eval(const LassoDataWord& w, std::size_t i, const RegisterAssignment& nu, const Formula& phi) {
  w.check();
  return Evaluator(w).eval(i, nu, phi);
}

bool holds(const LassoDataWord& w, const Formula& phi) { return eval(w, 0, {}, phi); }

LassoDataWord data_word(const CounterMachine& a, const LassoRun& lasso) {
  const auto& cs = lasso.run.configs;
  if (cs.empty() || lasso.loop_start + 1 >= cs.size()) throw ArgumentError("lasso has an empty loop");
  LassoDataWord w;
  for (std::size_t i = 0; i + 1 < cs.size(); ++i)
    (i < lasso.loop_start ? w.prefix : w.loop).push_back({a.labels(cs[i].state), cs[i].value});
  w.drift = lasso.drift();
  return w;
}

} // namespace oca
