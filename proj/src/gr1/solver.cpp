#include "opsyn/gr1/solver.hpp"

#include <chrono>
#include <sstream>
#include <stdexcept>

namespace opsyn::gr1 {

using bdd::Bdd;

namespace {

double now_seconds() {
  using namespace std::chrono;
  return duration<double>(steady_clock::now().time_since_epoch()).count();
}

}  // namespace

Solver::Solver(const bits::BitGame& game, SolverOptions options)
    : game_(game), options_(options), mgr_(options.node_limit) {
  int n = game.layout.bit_count();
  for (int b = 0; b < n; ++b) {
    cur_.push_back(mgr_.add_var(game.layout.bit(b).name, false));
    next_.push_back(mgr_.add_var(game.layout.bit(b).name + "'", true));
  }
  int goals = static_cast<int>(game.sys_live.size());
  int width = 1;
  while ((1 << width) < goals) ++width;
  for (int i = 0; i < width; ++i) {
    mem_.push_back(mgr_.add_var("__mem@" + std::to_string(i), false));
    mem_next_.push_back(mgr_.add_var("__mem@" + std::to_string(i) + "'", true));
  }
  for (int b : game.env_bits) {
    x_.push_back(cur(b));
    xp_.push_back(next(b));
  }
  for (int b : game.sys_bits) {
    y_.push_back(cur(b));
    yp_.push_back(next(b));
  }
  prime_map_.assign(static_cast<std::size_t>(mgr_.var_count()), -1);
  unprime_map_.assign(static_cast<std::size_t>(mgr_.var_count()), -1);
  for (int b = 0; b < n; ++b) {
    prime_map_[static_cast<std::size_t>(cur(b))] = next(b);
    unprime_map_[static_cast<std::size_t>(next(b))] = cur(b);
  }
  for (std::size_t i = 0; i < mem_.size(); ++i) {
    prime_map_[static_cast<std::size_t>(mem_[i])] = mem_next_[i];
    unprime_map_[static_cast<std::size_t>(mem_next_[i])] = mem_[i];
  }

  mgr_.set_reorder_policy(options_.reorder);
  begin_phase("build");
  {
    bits::BddBuilder builder(game.store, mgr_, cur_, next_);
    auto conj = [&](const std::vector<bits::NodeId>& xs) {
      Bdd acc = mgr_.bdd_true();
      for (auto n : xs) acc &= builder.build(n);
      return acc;
    };
    env_init_ = conj(game.env_init);
    sys_init_ = conj(game.sys_init);
    env_trans_ = conj(game.env_safety);
    sys_trans_ = conj(game.sys_safety);
    for (auto n : game.env_live) env_goals_.push_back(builder.build(n));
    for (auto n : game.sys_live) sys_goals_.push_back(builder.build(n));
  }
  if (env_goals_.empty()) env_goals_.push_back(mgr_.bdd_true());
  if (sys_goals_.empty()) sys_goals_.push_back(mgr_.bdd_true());
  end_phase(0);
}

void Solver::begin_phase(const std::string& name) {
  PhaseStats s;
  s.phase = name;
  stats_.push_back(s);
  mgr_.reset_peak();
  phase_start_ = now_seconds();
  phase_reorders_ = mgr_.stats().reorder_runs;
}

void Solver::end_phase(std::size_t iterations) {
  PhaseStats& s = stats_.back();
  s.seconds = now_seconds() - phase_start_;
  s.peak_nodes = mgr_.stats().peak_live_nodes;
  s.live_nodes = mgr_.live_nodes();
  s.reorders = mgr_.stats().reorder_runs - phase_reorders_;
  s.iterations = iterations;
}

std::string Solver::stats_csv() const {
  std::ostringstream out;
  out << "phase,seconds,peak_nodes,live_nodes,reorders,iterations\n";
  for (const auto& s : stats_)
    out << s.phase << ',' << s.seconds << ',' << s.peak_nodes << ',' << s.live_nodes << ',' << s.reorders << ','
        << s.iterations << '\n';
  return out.str();
}

Bdd Solver::prime(const Bdd& f) { return mgr_.rename(f, prime_map_); }
Bdd Solver::unprime(const Bdd& f) { return mgr_.rename(f, unprime_map_); }

Bdd Solver::cpre(const Bdd& s) {
  // forall x'. env_trans -> exists y'. sys_trans & s'
  Bdd reach = mgr_.and_exists(sys_trans_, prime(s), yp_);
  return !mgr_.and_exists(env_trans_, !reach, xp_);
}

Bdd Solver::mem_is(int j, bool primed) {
  const auto& vars = primed ? mem_next_ : mem_;
  Bdd acc = mgr_.bdd_true();
  for (std::size_t i = 0; i < vars.size(); ++i) acc &= ((j >> i) & 1) ? mgr_.var(vars[i]) : mgr_.nvar(vars[i]);
  return acc;
}

bool Solver::solve() {
  begin_phase("winning_region");
  std::size_t iterations = 0;
  Bdd z = mgr_.bdd_true();
  std::size_t m = sys_goals_.size(), n = env_goals_.size();
  yit_.assign(m, {});
  xit_.assign(m, {});
  while (true) {
    ++iterations;
    Bdd znew = mgr_.bdd_true();
    for (std::size_t j = 0; j < m; ++j) {
      Bdd start = sys_goals_[j] & cpre(z);
      Bdd y = mgr_.bdd_false();
      std::vector<Bdd> ys{y};
      std::vector<std::vector<Bdd>> xs{{}};
      while (true) {
        Bdd cy = start | cpre(y);
        Bdd ynew = mgr_.bdd_false();
        std::vector<Bdd> xr;
        for (std::size_t i = 0; i < n; ++i) {
          Bdd x = z;
          while (true) {
            Bdd xn = cy | ((!env_goals_[i]) & cpre(x));
            if (xn == x) break;
            x = xn;
          }
          xr.push_back(x);
          ynew |= x;
        }
        if (ynew == y) break;
        if (!y.leq(ynew)) throw std::logic_error("GR(1) least fixpoint is not increasing");
        y = ynew;
        ys.push_back(y);
        xs.push_back(xr);
      }
      yit_[j] = ys;
      xit_[j] = xs;
      znew &= y;
    }
    if (!znew.leq(z)) throw std::logic_error("GR(1) greatest fixpoint is not decreasing");
    if (znew == z) break;
    z = znew;
  }
  z_ = z;
  // forall x. (exists y. env_init) -> exists y. (env_init & sys_init & Z)
  Bdd ok = mgr_.exists(y_, env_init_).implies(mgr_.exists(y_, env_init_ & sys_init_ & z_));
  realizable_ = mgr_.forall(x_, ok).is_true();
  solved_ = true;
  end_phase(iterations);
  return realizable_;
}

void Solver::build_strategies() {
  if (!solved_) solve();
  if (!realizable_) throw std::logic_error("strategy requested for an unrealizable game");
  begin_phase("goal_strategies");
  int m = goal_count();
  std::vector<int> post = yp_;
  sub_.clear();
  Bdd zp = prime(z_);
  for (int j = 0; j < m; ++j) {
    Bdd rel = mgr_.bdd_false();
    Bdd covered = mgr_.bdd_false();  // over (x, y, x')
    auto add = [&](const Bdd& part) {
      Bdd fresh = part & !covered;
      rel |= fresh;
      covered |= mgr_.exists(post, fresh);
    };
    add(z_ & sys_goals_[static_cast<std::size_t>(j)] & sys_trans_ & zp);
    const auto& ys = yit_[static_cast<std::size_t>(j)];
    const auto& xs = xit_[static_cast<std::size_t>(j)];
    for (std::size_t r = 2; r < ys.size(); ++r) add((ys[r] & !ys[r - 1]) & sys_trans_ & prime(ys[r - 1]));
    for (std::size_t r = 1; r < ys.size(); ++r) {
      Bdd band = ys[r] & !ys[r - 1];
      for (std::size_t i = 0; i < xs[r].size(); ++i)
        add(band & xs[r][i] & (!env_goals_[i]) & sys_trans_ & prime(xs[r][i]));
    }
    sub_.push_back(rel);
  }
  end_phase(static_cast<std::size_t>(m));
}

void Solver::combine() {
  if (sub_.empty()) build_strategies();
  begin_phase("combine");
  mgr_.set_reorder_policy(options_.reorder_phase3 ? bdd::ReorderPolicy::Auto : bdd::ReorderPolicy::Off);
  int m = goal_count();
  Bdd t = mgr_.bdd_false();
  for (int j = 0; j < m; ++j) {
    Bdd goal_part = z_ & sys_goals_[static_cast<std::size_t>(j)];
    Bdd advance = sub_[static_cast<std::size_t>(j)] & goal_part & mem_is((j + 1) % m, true);
    Bdd stay = sub_[static_cast<std::size_t>(j)] & !goal_part & mem_is(j, true);
    t |= mem_is(j, false) & (advance | stay);
  }
  strategy_ = t;
  mgr_.set_reorder_policy(options_.reorder);
  end_phase(static_cast<std::size_t>(m));
}

}  // namespace opsyn::gr1
