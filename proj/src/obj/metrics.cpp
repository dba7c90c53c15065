#include "fragmenta/obj/metrics.hpp"

#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <unordered_set>

#include "fragmenta/chem/canonical.hpp"
#include "fragmenta/chem/errors.hpp"
#include "fragmenta/chem/properties.hpp"
#include "fragmenta/chem/smiles.hpp"
#include "fragmenta/chem/substructure.hpp"
#include "fragmenta/parallel/kernels.hpp"

namespace fragmenta::obj {

using nlohmann::json;

MembershipPattern MembershipPattern::parse(const std::string& text) {
  MembershipPattern mp;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    Clause c;
    if (!(fields >> c.pattern)) continue;
    long count = 1;
    if (fields >> count) {
      if (count < 1) throw std::invalid_argument("membership line " + std::to_string(lineno) + ": count must be >= 1");
    }
    c.min_count = static_cast<std::size_t>(count);
    c.compiled = chem::parse_pattern(c.pattern);
    mp.clauses_.push_back(std::move(c));
  }
  return mp;
}

MembershipPattern MembershipPattern::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open membership pattern " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

bool MembershipPattern::matches(const chem::Molecule& m) const {
  for (const auto& c : clauses_) {
    if (c.min_count == 1 ? chem::match_substructure(c.compiled, m)
                         : chem::count_matches(c.compiled, m) >= c.min_count)
      return true;
  }
  return false;
}

namespace {

double pct(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : 100.0 * static_cast<double>(num) / static_cast<double>(den);
}

EvaluationReport evaluate_valid(std::span<const chem::Molecule> mols, std::size_t total,
                                std::span<const chem::Molecule> training, const MembershipPattern* membership,
                                const PropertyProvider& provider, const EvaluationOptions& opt) {
  if (training.empty()) throw EmptyBatch("evaluate: training set is empty");
  EvaluationReport r;
  r.total = total;
  r.valid = mols.size();
  r.validity = pct(r.valid, total);
  r.provider = provider.name();
  const std::size_t n = mols.size();
  if (n == 0) return r;

  std::unordered_set<std::string> train_set;
  for (const auto& m : training) train_set.insert(chem::write_canonical(m).str());

  std::vector<std::string> canon(n);
  std::unordered_set<std::string> seen;
  std::vector<char> first_occurrence(n, 0);
  std::size_t novel_unique = 0;
  for (std::size_t i = 0; i < n; ++i) {
    canon[i] = chem::write_canonical(mols[i]).str();
    if (seen.insert(canon[i]).second) {
      first_occurrence[i] = 1;
      if (!train_set.count(canon[i])) ++novel_unique;
    }
  }
  r.uniqueness = pct(seen.size(), n);
  r.novelty = pct(novel_unique, seen.size());

  const auto gen_fps = parallel::fingerprints(mols, opt.fingerprint_radius, opt.fingerprint_width);
  const auto train_fps = parallel::fingerprints(training, opt.fingerprint_radius, opt.fingerprint_width);
  r.diversity = parallel::mean_pairwise_distance(gen_fps);
  r.chamfer = parallel::chamfer_distance(gen_fps, train_fps);

  std::size_t lipinski = 0, members = 0, discovered = 0, discovered_member = 0;
  std::set<std::string> scaffolds;
  std::vector<double> qed(n), sa(n), mw(n), logp(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto props = chem::properties(mols[i]);
    if (chem::lipinski_pass(props)) ++lipinski;
    if (auto s = chem::murcko_scaffold(mols[i])) scaffolds.insert(s->str());
    qed[i] = provider.qed(mols[i]);
    sa[i] = provider.sa(mols[i]);
    mw[i] = props.mol_weight;
    logp[i] = props.logp;
    const bool member = membership && membership->matches(mols[i]);
    if (member) ++members;
    // Each distinct string is counted once, at its first occurrence.
    if (first_occurrence[i] && !train_set.count(canon[i]) && sa[i] <= opt.sa_threshold) {
      ++discovered;
      if (member) ++discovered_member;
    }
  }
  r.lipinski = pct(lipinski, n);
  r.scaffold_count = scaffolds.size();
  r.scaffold_diversity = static_cast<double>(scaffolds.size()) / static_cast<double>(n);
  r.discovery_rate = pct(discovered, n);
  if (membership) {
    r.membership = pct(members, n);
    r.discovery_rate_membership = pct(discovered_member, n);
  }
  const double dn = static_cast<double>(n);
  r.mean_qed = parallel::ordered_sum(qed) / dn;
  r.mean_sa = parallel::ordered_sum(sa) / dn;
  r.mean_mw = parallel::ordered_sum(mw) / dn;
  r.mean_logp = parallel::ordered_sum(logp) / dn;
  return r;
}

}  // namespace

EvaluationReport evaluate(std::span<const std::string> generated, std::span<const chem::Molecule> training,
                          const MembershipPattern* membership, const PropertyProvider& provider,
                          const EvaluationOptions& options) {
  if (generated.empty()) throw EmptyBatch("evaluate: generated batch is empty");
  std::vector<chem::Molecule> valid;
  valid.reserve(generated.size());
  for (const auto& s : generated) {
    try {
      valid.push_back(chem::parse_smiles(s));
    } catch (const chem::SmilesError&) {
    }
  }
  return evaluate_valid(valid, generated.size(), training, membership, provider, options);
}

EvaluationReport evaluate(std::span<const chem::Molecule> generated, std::span<const chem::Molecule> training,
                          const MembershipPattern* membership, const PropertyProvider& provider,
                          const EvaluationOptions& options) {
  if (generated.empty()) throw EmptyBatch("evaluate: generated batch is empty");
  return evaluate_valid(generated, generated.size(), training, membership, provider, options);
}

json to_json(const EvaluationReport& r) {
  json j{{"total", r.total},
         {"valid", r.valid},
         {"validity", r.validity},
         {"uniqueness", r.uniqueness},
         {"novelty", r.novelty},
         {"diversity", r.diversity},
         {"chamfer", r.chamfer},
         {"lipinski", r.lipinski},
         {"scaffold_diversity", r.scaffold_diversity},
         {"scaffold_count", r.scaffold_count},
         {"discovery_rate", r.discovery_rate},
         {"mean_qed", r.mean_qed},
         {"mean_sa", r.mean_sa},
         {"mean_mw", r.mean_mw},
         {"mean_logp", r.mean_logp},
         {"provider", r.provider}};
  j["membership"] = r.membership ? json(*r.membership) : json(nullptr);
  j["discovery_rate_membership"] = r.discovery_rate_membership ? json(*r.discovery_rate_membership) : json(nullptr);
  return j;
}

EvaluationReport report_from_json(const json& j) {
  EvaluationReport r;
  r.total = j.at("total").get<std::size_t>();
  r.valid = j.at("valid").get<std::size_t>();
  r.validity = j.at("validity").get<double>();
  r.uniqueness = j.at("uniqueness").get<double>();
  r.novelty = j.at("novelty").get<double>();
  r.diversity = j.at("diversity").get<double>();
  r.chamfer = j.at("chamfer").get<double>();
  r.lipinski = j.at("lipinski").get<double>();
  r.scaffold_diversity = j.at("scaffold_diversity").get<double>();
  r.scaffold_count = j.at("scaffold_count").get<std::size_t>();
  r.discovery_rate = j.at("discovery_rate").get<double>();
  r.mean_qed = j.at("mean_qed").get<double>();
  r.mean_sa = j.at("mean_sa").get<double>();
  r.mean_mw = j.at("mean_mw").get<double>();
  r.mean_logp = j.at("mean_logp").get<double>();
  r.provider = j.value("provider", std::string());
  if (j.contains("membership") && !j["membership"].is_null()) r.membership = j["membership"].get<double>();
  if (j.contains("discovery_rate_membership") && !j["discovery_rate_membership"].is_null())
    r.discovery_rate_membership = j["discovery_rate_membership"].get<double>();
  return r;
}

std::string render_table(std::span<const std::pair<std::string, EvaluationReport>> rows) {
  const std::vector<std::string> header{"Model", "Valid", "Unique", "Novel", "Div", "Chamfer", "Lipinski", "Scaffold",
                                        "Mem", "DR", "DR(mem)", "QED", "SA", "MW", "logP"};
  auto fixed = [](double v, int prec) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(prec) << v;
    return os.str();
  };
  auto opt = [&](const std::optional<double>& v) { return v ? fixed(*v, 1) : std::string("-"); };
  std::vector<std::vector<std::string>> cells{header};
  for (const auto& [label, r] : rows) {
    cells.push_back({label, fixed(r.validity, 1), fixed(r.uniqueness, 1), fixed(r.novelty, 1), fixed(r.diversity, 3),
                     fixed(r.chamfer, 3), fixed(r.lipinski, 1), fixed(r.scaffold_diversity, 3), opt(r.membership),
                     fixed(r.discovery_rate, 1), opt(r.discovery_rate_membership), fixed(r.mean_qed, 3),
                     fixed(r.mean_sa, 2), fixed(r.mean_mw, 1), fixed(r.mean_logp, 2)});
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& row : cells)
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  std::ostringstream os;
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c == 0) {
        os << std::left << std::setw(static_cast<int>(width[c])) << row[c];
      } else {
        os << "  " << std::right << std::setw(static_cast<int>(width[c])) << row[c];
      }
    }
    os << '\n';
  }
  return os.str();
}

std::string render_table(const std::string& label, const EvaluationReport& r) {
  const std::pair<std::string, EvaluationReport> row{label, r};
  return render_table(std::span(&row, 1));
}

}  // namespace fragmenta::obj
