#include "opda/simulate.hpp"

#include <cassert>
#include <map>
#include <tuple>

#include "opda/errors.hpp"

namespace opda {

RunBounds RunBounds::for_input_length(size_t n, uint64_t coeff) {
  RunBounds b;
  b.max_steps = coeff * (static_cast<uint64_t>(n) + 2) + coeff;
  b.max_stack_height = b.max_steps;
  b.max_tape_len = b.max_steps;
  return b;
}

namespace {

class Simulator {
 public:
  Simulator(const MachineSpec& m, const Word& w, const RunBounds& b,
            const RunCallbacks& cb)
      : m_(m), w_(w), b_(b), cb_(cb) {
    for (Symbol s : w) {
      if (!m.in_input_alphabet(s)) {
        throw InputAlphabetError("input symbol '" + symbol_name(s) +
                                 "' is outside the input alphabet of '" +
                                 m.name + "'");
      }
    }
    rules_by_state_.resize(m.states.size());
    for (uint32_t i = 0; i < m.transitions.size(); ++i) {
      rules_by_state_[m.transitions[i].from].push_back(i);
    }
    pos_ = m.reads_cent() ? 0 : 1;
    if (m.has_stack()) stack_.push_back(m.bottom_marker());
    tapes_.resize(m.query_alphabets.size());
  }

  RunStats run() {
    stop_ = false;
    window_.clear();
    window_.push_back(Entry{false, m_.start, stack_});
    enter(m_.start);
    return stats_;
  }

 private:
  struct Entry {
    bool marker;  // progress marker: the head moved or a tape grew
    State state;
    Word stack;
  };

  // Cell under the head; kLambda when the head has stepped past '$'.
  Symbol cell(size_t pos) const {
    size_t n = w_.size();
    if (pos == 0) return kCent;
    if (pos <= n) return w_[pos - 1];
    if (pos == n + 1) return kDollar;
    return kLambda;
  }

  bool applicable(const Transition& t) const {
    if (m_.has_stack()) {
      if (stack_.empty() || stack_.back() != t.top) return false;
    }
    if (t.read == kLambda) return true;
    Symbol c = cell(pos_);
    return c != kLambda && c == t.read;
  }

  void end_path(PathEnd how) {
    stats_.paths_explored++;
    switch (how) {
      case PathEnd::Accept: stats_.accepting_paths++; break;
      case PathEnd::Exceeded: stats_.exceeded_paths++; break;
      case PathEnd::Repeat: stats_.repeated_configs++; break;
      case PathEnd::Stuck: stats_.died_paths++; break;
      case PathEnd::Reject: break;
    }
    if (how == PathEnd::Accept && cb_.on_accept) {
      if (!cb_.on_accept(tapes_)) stop_ = true;
    }
    if (cb_.on_path_end) {
      Configuration c{cur_state_, pos_, stack_, tapes_, steps_};
      if (!cb_.on_path_end(path_, c, how)) stop_ = true;
    }
  }

  // Explores everything reachable from state q with the current
  // configuration.  Head monotonicity and tape append-only discipline hold
  // by construction of apply().
  void enter(State q) {
    cur_state_ = q;
    if (m_.is_accepting(q)) {
      end_path(PathEnd::Accept);
      return;
    }
    if (m_.is_rejecting(q)) {
      end_path(PathEnd::Reject);
      return;
    }
    if (m_.mode == OracleMode::Turing && q == m_.query_state) {
      if (!cb_.oracle) {
        throw PreconditionError(
            "machine '" + m_.name +
            "' fired an oracle query but no oracle was supplied");
      }
      bool answer = cb_.oracle(tapes_.at(0));
      // The query tape blanks and its head returns to the start cell.
      Word saved = std::move(tapes_[0]);
      tapes_[0].clear();
      size_t saved_window = window_.size();
      window_.push_back(Entry{true, q, {}});
      enter(answer ? m_.yes_state : m_.no_state);
      window_.resize(saved_window);
      tapes_[0] = std::move(saved);
      cur_state_ = q;
      return;
    }
    if (steps_ >= b_.max_steps) {
      end_path(PathEnd::Exceeded);
      return;
    }

    bool any = false;
    for (uint32_t idx : rules_by_state_[q]) {
      if (stop_) return;
      const Transition& t = m_.transitions[idx];
      if (!applicable(t)) continue;
      any = true;
      apply(idx, t);
      cur_state_ = q;
    }
    if (!any) end_path(PathEnd::Stuck);
  }

  void apply(uint32_t idx, const Transition& t) {
    bool progress = t.read != kLambda;
    size_t old_pos = pos_;
    if (t.read != kLambda) pos_++;

    size_t popped_window = window_.size();
    Symbol popped_top = kLambda;
    size_t push_count = 0;
    if (m_.has_stack()) {
      popped_top = stack_.back();
      stack_.pop_back();
      for (size_t i = t.push.size(); i-- > 0;) stack_.push_back(t.push[i]);
      push_count = t.push.size();
    }
    std::vector<size_t> emitted;
    for (size_t tp = 0; tp < t.emits.size(); ++tp) {
      if (t.emits[tp] != kLambda) {
        tapes_[tp].push_back(t.emits[tp]);
        emitted.push_back(tp);
        progress = true;
      }
    }
    steps_++;
    path_.push_back(idx);

    auto undo = [&] {
      path_.pop_back();
      steps_--;
      for (size_t tp : emitted) tapes_[tp].pop_back();
      if (m_.has_stack()) {
        stack_.resize(stack_.size() - push_count);
        stack_.push_back(popped_top);
      }
      pos_ = old_pos;
      window_.resize(popped_window);
    };

    bool over = stack_.size() > b_.max_stack_height;
    for (size_t tp : emitted) {
      over = over || tapes_[tp].size() > b_.max_tape_len;
    }
    if (over) {
      cur_state_ = t.to;
      end_path(PathEnd::Exceeded);
      undo();
      return;
    }

    if (progress) {
      window_.push_back(Entry{true, t.to, {}});
    } else {
      // No head movement and no tape growth: an exact configuration repeat
      // is possible; scan back to the last progress marker.
      for (size_t i = window_.size(); i-- > 0;) {
        const Entry& e = window_[i];
        if (e.marker) break;
        if (e.state == t.to && e.stack == stack_) {
          cur_state_ = t.to;
          end_path(PathEnd::Repeat);
          undo();
          return;
        }
      }
      window_.push_back(Entry{false, t.to, stack_});
    }
    enter(t.to);
    undo();
  }

  const MachineSpec& m_;
  const Word& w_;
  RunBounds b_;
  const RunCallbacks& cb_;
  std::vector<std::vector<uint32_t>> rules_by_state_;

  Word stack_;
  std::vector<Word> tapes_;
  size_t pos_ = 1;
  uint64_t steps_ = 0;
  State cur_state_ = 0;
  std::vector<uint32_t> path_;
  std::vector<Entry> window_;
  RunStats stats_;
  bool stop_ = false;
};

}  // namespace

RunStats explore(const MachineSpec& spec, const Word& w, const RunBounds& b,
                 const RunCallbacks& cb) {
  Simulator sim(spec, w, b, cb);
  return sim.run();
}

RunResult run_machine(const MachineSpec& spec, const Word& w,
                      const RunBounds& b) {
  RunResult r;
  RunCallbacks cb;
  cb.on_accept = [&](const OutputTuple& tapes) {
    r.valid_outputs.insert(tapes);
    return true;
  };
  r.stats = explore(spec, w, b, cb);
  if (r.stats.accepting_paths > 0) {
    r.verdict = Verdict::Accept;
  } else if (r.stats.exceeded_paths > 0) {
    r.verdict = Verdict::ResourceExceeded;
  } else {
    r.verdict = Verdict::Reject;
  }
  return r;
}

Verdict accepts(const MachineSpec& spec, const Word& w, const RunBounds& b) {
  bool found = false;
  RunCallbacks cb;
  cb.on_accept = [&](const OutputTuple&) {
    found = true;
    return false;  // stop at the first accepting path
  };
  RunStats stats = explore(spec, w, b, cb);
  if (found) return Verdict::Accept;
  if (stats.exceeded_paths > 0) return Verdict::ResourceExceeded;
  return Verdict::Reject;
}

Verdict accepts_reachability(const MachineSpec& spec, const Word& w,
                             const RunBounds& b) {
  if (spec.mode == OracleMode::Turing) {
    throw PreconditionError(
        "reachability acceptance is not defined for turing reducers");
  }
  for (Symbol s : w) {
    if (!spec.in_input_alphabet(s)) {
      throw InputAlphabetError("input symbol '" + symbol_name(s) +
                               "' is outside the input alphabet of '" +
                               spec.name + "'");
    }
  }
  std::vector<std::vector<uint32_t>> rules_by_state(spec.states.size());
  for (uint32_t i = 0; i < spec.transitions.size(); ++i) {
    rules_by_state[spec.transitions[i].from].push_back(i);
  }
  size_t n = w.size();
  auto cell = [&](size_t pos) -> Symbol {
    if (pos == 0) return kCent;
    if (pos <= n) return w[pos - 1];
    if (pos == n + 1) return kDollar;
    return kLambda;
  };
  using Key = std::tuple<State, size_t, Word>;
  std::set<Key> visited;
  std::vector<Key> frontier;
  Word init_stack;
  if (spec.has_stack()) init_stack.push_back(spec.bottom_marker());
  Key start{spec.start, spec.reads_cent() ? 0u : 1u, init_stack};
  visited.insert(start);
  frontier.push_back(start);
  bool exceeded = false;
  while (!frontier.empty()) {
    auto [q, pos, stack] = frontier.back();
    frontier.pop_back();
    if (spec.is_accepting(q)) return Verdict::Accept;
    if (spec.is_halting(q)) continue;
    for (uint32_t idx : rules_by_state[q]) {
      const Transition& t = spec.transitions[idx];
      if (spec.has_stack() && (stack.empty() || stack.back() != t.top))
        continue;
      size_t npos = pos;
      if (t.read != kLambda) {
        Symbol c = cell(pos);
        if (c == kLambda || c != t.read) continue;
        npos = pos + 1;
      }
      Word nstack = stack;
      if (spec.has_stack()) {
        nstack.pop_back();
        for (size_t i = t.push.size(); i-- > 0;) nstack.push_back(t.push[i]);
        if (nstack.size() > b.max_stack_height) {
          exceeded = true;
          continue;
        }
      }
      Key k{t.to, npos, std::move(nstack)};
      if (visited.insert(k).second) frontier.push_back(std::move(k));
    }
  }
  return exceeded ? Verdict::ResourceExceeded : Verdict::Reject;
}

std::set<OutputTuple> valid_outputs(const MachineSpec& spec, const Word& w,
                                    const RunBounds& b) {
  return run_machine(spec, w, b).valid_outputs;
}

std::vector<PathRecord> run_paths(const MachineSpec& spec, const Word& w,
                                  const RunBounds& b) {
  std::vector<PathRecord> out;
  RunCallbacks cb;
  cb.on_path_end = [&](const std::vector<uint32_t>& path,
                       const Configuration& c, PathEnd how) {
    PathRecord r;
    r.rule_indices = path;
    r.final_config = c;
    r.accepted = how == PathEnd::Accept;
    r.end = how;
    out.push_back(std::move(r));
    return true;
  };
  explore(spec, w, b, cb);
  return out;
}

Configuration replay_path(const MachineSpec& spec, const Word& w,
                          std::span<const uint32_t> rule_indices) {
  Configuration c;
  c.state = spec.start;
  c.head_pos = spec.reads_cent() ? 0 : 1;
  if (spec.has_stack()) c.stack.push_back(spec.bottom_marker());
  c.tapes.resize(spec.query_alphabets.size());
  size_t n = w.size();
  auto cell = [&](size_t pos) -> Symbol {
    if (pos == 0) return kCent;
    if (pos <= n) return w[pos - 1];
    if (pos == n + 1) return kDollar;
    return kLambda;
  };
  for (uint32_t idx : rule_indices) {
    if (idx >= spec.transitions.size()) {
      throw PreconditionError("replay: rule index out of range");
    }
    const Transition& t = spec.transitions[idx];
    if (t.from != c.state) {
      throw PreconditionError("replay: rule does not start at current state");
    }
    if (spec.has_stack() &&
        (c.stack.empty() || c.stack.back() != t.top)) {
      throw PreconditionError("replay: stack top mismatch");
    }
    if (t.read != kLambda) {
      Symbol at = cell(c.head_pos);
      if (at == kLambda || at != t.read) {
        throw PreconditionError("replay: input symbol mismatch");
      }
      c.head_pos++;
    }
    if (spec.has_stack()) {
      c.stack.pop_back();
      for (size_t i = t.push.size(); i-- > 0;) c.stack.push_back(t.push[i]);
    }
    for (size_t tp = 0; tp < t.emits.size(); ++tp) {
      if (t.emits[tp] != kLambda) c.tapes[tp].push_back(t.emits[tp]);
    }
    c.steps++;
    c.state = t.to;
  }
  return c;
}

}  // namespace opda
