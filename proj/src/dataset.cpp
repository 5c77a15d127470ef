#include "grouprec/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace grouprec {
namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

std::int64_t parse_id(const std::string& tok, const std::string& path, std::size_t line_no) {
  std::int64_t value = 0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) {
    throw UserError(path + ":" + std::to_string(line_no) + ": malformed id '" + tok + "'");
  }
  return value;
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UserError("cannot open file: " + path);
  return in;
}

void finalize_rows(InteractionMatrix& m) {
  std::sort(m.pairs.begin(), m.pairs.end());
  m.row_index.assign(static_cast<std::size_t>(m.n_rows), {});
  for (const auto& [r, c] : m.pairs) m.row_index[static_cast<std::size_t>(r)].push_back(c);
}

}  // namespace

bool InteractionMatrix::contains(int row, int col) const {
  if (row < 0 || row >= n_rows) return false;
  const auto& cols = row_index[static_cast<std::size_t>(row)];
  return std::binary_search(cols.begin(), cols.end(), col);
}

void InteractionMatrix::restamp(int rows, int cols) {
  n_rows = std::max(n_rows, rows);
  n_cols = std::max(n_cols, cols);
  row_index.resize(static_cast<std::size_t>(n_rows));
}

InteractionMatrix load_interactions(const std::string& path, IdRegistry& subjects,
                                    IdRegistry& items, std::vector<std::string>* warnings) {
  auto in = open_or_throw(path);
  std::set<std::pair<int, int>> seen;
  std::size_t duplicates = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto toks = split_ws(line);
    if (toks.empty()) continue;
    if (toks.size() < 2) {
      throw UserError(path + ":" + std::to_string(line_no) + ": expected 'subject item ...'");
    }
    const int s = subjects.intern(parse_id(toks[0], path, line_no));
    const int t = items.intern(parse_id(toks[1], path, line_no));
    if (!seen.emplace(s, t).second) ++duplicates;
  }
  if (duplicates > 0 && warnings != nullptr) {
    warnings->push_back(path + ": " + std::to_string(duplicates) + " duplicate pair(s) collapsed");
  }
  InteractionMatrix m;
  m.n_rows = subjects.size();
  m.n_cols = items.size();
  m.pairs.assign(seen.begin(), seen.end());
  finalize_rows(m);
  return m;
}

EvalSet load_eval_negatives(const std::string& path, IdRegistry& subjects, IdRegistry& items,
                            SubjectKind kind) {
  auto in = open_or_throw(path);
  EvalSet set;
  set.subject_kind = kind;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto toks = split_ws(line);
    if (toks.empty()) continue;
    const std::string& head = toks[0];
    const auto where = path + ":" + std::to_string(line_no);
    if (head.size() < 5 || head.front() != '(' || head.back() != ')') {
      throw UserError(where + ": expected '(subject,positive)' header, got '" + head + "'");
    }
    const auto comma = head.find(',');
    if (comma == std::string::npos) {
      throw UserError(where + ": expected '(subject,positive)' header, got '" + head + "'");
    }
    EvalCase c;
    c.subject = subjects.intern(parse_id(head.substr(1, comma - 1), path, line_no));
    c.positive = items.intern(parse_id(head.substr(comma + 1, head.size() - comma - 2), path, line_no));
    if (toks.size() < 2) throw UserError(where + ": no negatives listed");
    for (std::size_t i = 1; i < toks.size(); ++i) {
      c.negatives.push_back(items.intern(parse_id(toks[i], path, line_no)));
    }
    set.cases.push_back(std::move(c));
  }
  return set;
}

GroupMembership load_group_members(const std::string& path, IdRegistry& groups, IdRegistry& users,
                                   std::vector<std::string>* warnings) {
  auto in = open_or_throw(path);
  GroupMembership gm;
  std::string line;
  std::size_t line_no = 0;
  std::size_t duplicates = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto toks = split_ws(line);
    if (toks.empty()) continue;
    const auto where = path + ":" + std::to_string(line_no);
    if (toks.size() != 2) throw UserError(where + ": expected 'group_id u1,u2,...'");
    const int g = groups.intern(parse_id(toks[0], path, line_no));
    std::vector<int> members;
    std::stringstream ms(toks[1]);
    std::string tok;
    while (std::getline(ms, tok, ',')) {
      if (tok.empty()) throw UserError(where + ": empty member id");
      members.push_back(users.intern(parse_id(tok, path, line_no)));
    }
    if (members.empty()) throw UserError(where + ": empty member list");
    std::sort(members.begin(), members.end());
    const auto uniq = std::unique(members.begin(), members.end());
    duplicates += static_cast<std::size_t>(std::distance(uniq, members.end()));
    members.erase(uniq, members.end());
    if (g >= gm.n_groups) {
      gm.members.resize(static_cast<std::size_t>(g) + 1);
      gm.n_groups = g + 1;
    }
    gm.members[static_cast<std::size_t>(g)] = std::move(members);
  }
  if (duplicates > 0 && warnings != nullptr) {
    warnings->push_back(path + ": " + std::to_string(duplicates) +
                        " duplicate member id(s) collapsed");
  }
  return gm;
}

void write_interactions(const std::string& path, const InteractionMatrix& m,
                        const IdRegistry& subjects, const IdRegistry& items) {
  std::ofstream out(path);
  if (!out) throw UserError("cannot write file: " + path);
  for (const auto& [r, c] : m.pairs) {
    out << subjects.raw(r) << ' ' << items.raw(c) << '\n';
  }
}

Dataset load_dataset(const DatasetPaths& paths) {
  Dataset ds;
  auto& ctx = ds.ctx;
  // User-side files first: their first-appearance order pins the dense ids
  // the model is built over. Group-side files load afterwards so their
  // presence or absence cannot shift any model index.
  ds.train = load_interactions(paths.train, ctx.users, ctx.items, &ctx.warnings);
  if (!paths.user_test.empty()) {
    load_interactions(paths.user_test, ctx.users, ctx.items, &ctx.warnings);
  }
  ds.user_eval = load_eval_negatives(paths.user_negatives, ctx.users, ctx.items, SubjectKind::User);
  ds.n_users = ctx.users.size();

  if (!paths.group_test.empty()) {
    load_interactions(paths.group_test, ctx.groups, ctx.items, &ctx.warnings);
  }
  if (!paths.group_negatives.empty()) {
    ds.group_eval =
        load_eval_negatives(paths.group_negatives, ctx.groups, ctx.items, SubjectKind::Group);
  }
  ds.n_items = ctx.items.size();

  if (!paths.group_train.empty()) {
    ds.group_train = load_interactions(paths.group_train, ctx.groups, ctx.items, &ctx.warnings);
  }
  if (!paths.group_members.empty()) {
    ds.groups = load_group_members(paths.group_members, ctx.groups, ctx.users, &ctx.warnings);
  }
  ds.has_group_side = ds.groups.n_groups > 0 && !ds.group_eval.cases.empty();

  ds.train.restamp(ds.n_users, ds.n_items);
  ds.group_train.restamp(ctx.groups.size(), ctx.items.size());
  return ds;
}

ValidationReport validate_dataset(const Dataset& ds) {
  ValidationReport rep;
  for (const auto& w : ds.ctx.warnings) rep.warnings.push_back(w);

  for (const auto& [u, t] : ds.train.pairs) {
    if (u < 0 || u >= ds.n_users || t < 0 || t >= ds.n_items) {
      rep.errors.push_back("train pair (" + std::to_string(u) + "," + std::to_string(t) +
                           ") out of range");
    }
  }

  int cold_users = 0;
  for (int u = 0; u < ds.n_users; ++u) {
    if (ds.train.row_index[static_cast<std::size_t>(u)].empty()) ++cold_users;
  }
  if (cold_users > 0) {
    rep.warnings.push_back(std::to_string(cold_users) + " user(s) with no training interaction");
  }
  std::vector<char> item_seen(static_cast<std::size_t>(ds.n_items), 0);
  for (const auto& [u, t] : ds.train.pairs) item_seen[static_cast<std::size_t>(t)] = 1;
  const auto cold_items = std::count(item_seen.begin(), item_seen.end(), 0);
  if (cold_items > 0) {
    rep.warnings.push_back(std::to_string(cold_items) + " item(s) with no training interaction");
  }

  auto check_eval = [&](const EvalSet& set, int n_subjects, const char* name) {
    int held_out_absent = 0;
    for (std::size_t i = 0; i < set.cases.size(); ++i) {
      const auto& c = set.cases[i];
      if (c.subject < 0 || c.subject >= n_subjects) {
        rep.errors.push_back(std::string(name) + " case " + std::to_string(i) +
                             ": subject index out of range");
      }
      if (c.positive < 0 || c.positive >= ds.n_items) {
        rep.errors.push_back(std::string(name) + " case " + std::to_string(i) +
                             ": positive item index out of range");
      }
      for (int neg : c.negatives) {
        if (neg < 0 || neg >= ds.n_items) {
          rep.errors.push_back(std::string(name) + " case " + std::to_string(i) +
                               ": negative item index out of range");
        }
        if (neg == c.positive) {
          rep.errors.push_back(std::string(name) + " case " + std::to_string(i) +
                               ": positive listed among its own negatives");
        }
      }
      if (set.subject_kind == SubjectKind::User && c.subject >= 0 && c.subject < ds.n_users &&
          !ds.train.contains(c.subject, c.positive)) {
        ++held_out_absent;
      }
    }
    if (held_out_absent > 0) {
      rep.info.push_back(std::string(name) + ": " + std::to_string(held_out_absent) +
                         " positive(s) held out of training (leave-one-out)");
    }
  };
  check_eval(ds.user_eval, ds.n_users, "user_eval");
  if (ds.has_group_side) check_eval(ds.group_eval, ds.groups.n_groups, "group_eval");

  for (int g = 0; g < ds.groups.n_groups; ++g) {
    const auto& mem = ds.groups.members[static_cast<std::size_t>(g)];
    if (mem.empty()) {
      rep.errors.push_back("group " + std::to_string(g) + " has no members");
      continue;
    }
    for (int u : mem) {
      if (u < 0 || u >= ds.n_users) {
        rep.errors.push_back("group " + std::to_string(g) + ": member index " + std::to_string(u) +
                             " outside the trained user range");
      }
    }
  }

  rep.group_train_excluded_from_training = true;
  rep.info.push_back("group-item training interactions are evaluation-side only");
  return rep;
}

std::string ValidationReport::to_string() const {
  std::ostringstream os;
  for (const auto& e : errors) os << "error: " << e << '\n';
  for (const auto& w : warnings) os << "warning: " << w << '\n';
  for (const auto& i : info) os << "info: " << i << '\n';
  return os.str();
}

}  // namespace grouprec
