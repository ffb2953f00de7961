#include <algorithm>
#include <map>
#include <set>

#include "detail/evolution.hpp"

namespace maasim {

namespace {

constexpr int kGridDepth = 4;
constexpr int kDivisions = 1 << kGridDepth;

using Region = std::pair<int, int>;

// Adaptive grid over the archive's current extent (plus the candidate).
class Grid {
 public:
  Grid(const std::vector<Individual>& archive, const Individual& extra) {
    lo_s_ = hi_s_ = extra.obj.score;
    lo_t_ = hi_t_ = static_cast<double>(extra.obj.turns);
    for (const auto& a : archive) {
      lo_s_ = std::min(lo_s_, a.obj.score);
      hi_s_ = std::max(hi_s_, a.obj.score);
      lo_t_ = std::min(lo_t_, static_cast<double>(a.obj.turns));
      hi_t_ = std::max(hi_t_, static_cast<double>(a.obj.turns));
    }
    // Density counts distinct objective vectors: genomes tied on both
    // objectives add nothing to the spread and would otherwise pin the parent.
    std::map<Region, std::set<std::pair<double, std::size_t>>> points;
    for (const auto& a : archive) points[region(a)].insert({a.obj.score, a.obj.turns});
    for (const auto& [r, pts] : points) count_[r] = static_cast<int>(pts.size());
  }

  Region region(const Individual& ind) const {
    return {cell(ind.obj.score, lo_s_, hi_s_), cell(static_cast<double>(ind.obj.turns), lo_t_, hi_t_)};
  }
  int crowding(const Individual& ind) const {
    const auto it = count_.find(region(ind));
    return it == count_.end() ? 0 : it->second;
  }
  int max_crowding() const {
    int m = 0;
    for (const auto& [r, c] : count_) m = std::max(m, c);
    return m;
  }

 private:
  static int cell(double v, double lo, double hi) {
    if (hi <= lo) return 0;
    return std::min(kDivisions - 1, static_cast<int>((v - lo) / (hi - lo) * kDivisions));
  }

  double lo_s_, hi_s_, lo_t_, hi_t_;
  std::map<Region, int> count_;
};

bool dominated_by_archive(const std::vector<Individual>& archive, const Individual& m) {
  return std::any_of(archive.begin(), archive.end(), [&](const auto& a) { return dominates(a.obj, m.obj); });
}

bool in_archive(const std::vector<Individual>& archive, const Genome& g) {
  return std::any_of(archive.begin(), archive.end(), [&](const auto& a) { return a.genome == g; });
}

// Inserts a non-dominated candidate; when full, it displaces a member of the
// most crowded region if its own region is less crowded. Returns false when
// the candidate was not stored.
bool archive_insert(std::vector<Individual>& archive, const Individual& m, std::size_t cap) {
  if (in_archive(archive, m.genome) || dominated_by_archive(archive, m)) return false;
  std::erase_if(archive, [&](const auto& a) { return dominates(m.obj, a.obj); });
  if (archive.size() < cap) {
    archive.push_back(m);
    return true;
  }
  const Grid grid(archive, m);
  const int worst = grid.max_crowding();
  if (grid.crowding(m) >= worst) return false;
  for (auto it = archive.begin(); it != archive.end(); ++it)
    if (grid.crowding(*it) == worst) {
      archive.erase(it);
      break;
    }
  archive.push_back(m);
  return true;
}

}  // namespace

Front paes(const Problem& p, const AlgoConfig& cfg) {
  cfg.validate();
  const std::size_t n = p.genome_length();
  detail::Rng rng(cfg.seed);
  detail::Evaluator eval(p, cfg.evaluations);
  const double pm = detail::mutation_rate(cfg, n);

  // The initial population only seeds the archive; the walk itself is (1+1).
  std::vector<Individual> archive;
  Individual current;
  bool have_current = false;
  for (std::size_t i = 0; i < cfg.population && !eval.exhausted(); ++i) {
    Individual m = eval(detail::random_genome(n, rng));
    archive_insert(archive, m, cfg.archive);
    if (!have_current || dominates(m.obj, current.obj)) {
      current = std::move(m);
      have_current = true;
    }
  }

  while (!eval.exhausted()) {
    Genome g = current.genome;
    detail::mutate(g, pm, rng);
    if (g == current.genome) g.flip(detail::uniform_index(n, rng));
    detail::repair(g, rng);
    const Individual m = eval(std::move(g));

    if (dominates(current.obj, m.obj)) continue;
    if (dominates(m.obj, current.obj)) {
      archive_insert(archive, m, cfg.archive);
      current = m;
      continue;
    }
    if (dominated_by_archive(archive, m)) continue;
    archive_insert(archive, m, cfg.archive);
    // Incomparable: move unless the parent lies in a strictly less crowded region.
    const Grid grid(archive, m);
    if (grid.crowding(m) <= grid.crowding(current)) current = m;
  }
  return archive;
}

}  // namespace maasim
