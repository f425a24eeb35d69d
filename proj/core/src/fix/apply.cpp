#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "vibeguard/fix.hpp"
#include "vibeguard/util.hpp"

namespace vibeguard::fix {

namespace fs = std::filesystem;

std::string apply_edits(std::string_view text, std::vector<TextEdit> edits) {
  // Back to front. At one offset the replacement goes first, then insertions
  // in reverse so they end up in list order.
  std::vector<std::size_t> order(edits.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    const auto& a = edits[x];
    const auto& b = edits[y];
    if (a.start != b.start) return a.start > b.start;
    if (a.empty_range() != b.empty_range()) return !a.empty_range();
    return x > y;
  });
  std::string out(text);
  std::uint32_t floor = static_cast<std::uint32_t>(text.size());
  for (std::size_t i : order) {
    const auto& e = edits[i];
    if (e.start > e.end || e.end > text.size())
      throw Error(ErrorCode::SpanOutOfBounds, "edit [" + std::to_string(e.start) + ", " + std::to_string(e.end) +
                                                  ") outside " + e.path);
    if (e.end > floor) throw Error(ErrorCode::InvalidArgument, "overlapping edits in " + e.path);
    out.replace(e.start, e.end - e.start, e.replacement);
    floor = e.start;
  }
  return out;
}

std::map<std::string, std::string> preview(const index::CodebaseIndex& idx, const FixPlan& plan) {
  std::map<std::string, std::vector<TextEdit>> by_path;
  for (const auto& e : plan.edits) by_path[e.path].push_back(e);
  std::map<std::string, std::string> out;
  for (auto& [path, edits] : by_path) {
    if (!idx.contains(path)) throw Error(ErrorCode::StaleSnapshot, path + " is no longer in the workspace");
    out[path] = apply_edits(idx.text(path), std::move(edits));
  }
  for (const auto& [path, text] : plan.creates_files) out[path] = text;
  return out;
}

namespace {

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) {
      lines.push_back(text.substr(pos));
      break;
    }
    lines.push_back(text.substr(pos, nl + 1 - pos));
    pos = nl + 1;
  }
  return lines;
}

enum class Op : char { Keep = ' ', Del = '-', Add = '+' };

std::vector<std::pair<Op, std::string_view>> diff_lines(const std::vector<std::string_view>& a,
                                                       const std::vector<std::string_view>& b) {
  std::size_t pre = 0;
  while (pre < a.size() && pre < b.size() && a[pre] == b[pre]) ++pre;
  std::size_t suf = 0;
  while (suf < a.size() - pre && suf < b.size() - pre && a[a.size() - 1 - suf] == b[b.size() - 1 - suf]) ++suf;
  const std::size_t n = a.size() - pre - suf, m = b.size() - pre - suf;

  std::vector<std::pair<Op, std::string_view>> ops;
  for (std::size_t i = 0; i < pre; ++i) ops.emplace_back(Op::Keep, a[i]);
  if (n * m <= 16'000'000) {
    std::vector<std::vector<std::uint32_t>> lcs(n + 1, std::vector<std::uint32_t>(m + 1, 0));
    for (std::size_t i = n; i-- > 0;)
      for (std::size_t j = m; j-- > 0;)
        lcs[i][j] = a[pre + i] == b[pre + j] ? lcs[i + 1][j + 1] + 1 : std::max(lcs[i + 1][j], lcs[i][j + 1]);
    std::size_t i = 0, j = 0;
    while (i < n || j < m) {
      if (i < n && j < m && a[pre + i] == b[pre + j]) {
        ops.emplace_back(Op::Keep, a[pre + i]);
        ++i, ++j;
      } else if (i < n && (j == m || lcs[i + 1][j] >= lcs[i][j + 1])) {
        ops.emplace_back(Op::Del, a[pre + i++]);
      } else {
        ops.emplace_back(Op::Add, b[pre + j++]);
      }
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) ops.emplace_back(Op::Del, a[pre + i]);
    for (std::size_t j = 0; j < m; ++j) ops.emplace_back(Op::Add, b[pre + j]);
  }
  for (std::size_t i = a.size() - suf; i < a.size(); ++i) ops.emplace_back(Op::Keep, a[i]);
  return ops;
}

}  // namespace

std::string unified_diff(const std::string& old_path, const std::string& new_path, std::string_view before,
                         std::string_view after, int context) {
  if (before == after) return {};
  const auto a = split_lines(before), b = split_lines(after);
  const auto ops = diff_lines(a, b);
  const std::size_t ctx = static_cast<std::size_t>(std::max(context, 0));

  std::ostringstream out;
  out << "--- " << old_path << "\n+++ " << new_path << "\n";
  std::size_t k = 0;
  while (k < ops.size()) {
    while (k < ops.size() && ops[k].first == Op::Keep) ++k;
    if (k == ops.size()) break;
    // Hunk spans from ctx lines before the change to ctx lines after the last
    // change that is within 2*ctx of the previous one.
    std::size_t begin = k >= ctx ? k - ctx : 0;
    std::size_t end = k;
    while (end < ops.size()) {
      if (ops[end].first != Op::Keep) {
        ++end;
        continue;
      }
      std::size_t run = end;
      while (run < ops.size() && ops[run].first == Op::Keep) ++run;
      if (run == ops.size() || run - end > 2 * ctx) {
        end = std::min(run, end + ctx);
        break;
      }
      end = run;
    }
    std::size_t old_line = 1, new_line = 1;
    for (std::size_t i = 0; i < begin; ++i) {
      if (ops[i].first != Op::Add) ++old_line;
      if (ops[i].first != Op::Del) ++new_line;
    }
    std::size_t old_count = 0, new_count = 0;
    for (std::size_t i = begin; i < end; ++i) {
      if (ops[i].first != Op::Add) ++old_count;
      if (ops[i].first != Op::Del) ++new_count;
    }
    out << "@@ -" << (old_count ? old_line : old_line - 1) << "," << old_count << " +"
        << (new_count ? new_line : new_line - 1) << "," << new_count << " @@\n";
    for (std::size_t i = begin; i < end; ++i) {
      out << static_cast<char>(ops[i].first) << ops[i].second;
      if (!ops[i].second.ends_with('\n')) out << "\n\\ No newline at end of file\n";
    }
    k = end;
  }
  return out.str();
}

std::string plan_diff(const index::CodebaseIndex& idx, const FixPlan& plan) {
  std::string out;
  for (const auto& [path, text] : preview(idx, plan)) {
    const bool created = plan.creates_files.count(path) != 0;
    out += unified_diff(created ? "/dev/null" : "a/" + path, "b/" + path, created ? "" : idx.text(path), text);
  }
  return out;
}

// ---- workspaces ---------------------------------------------------------------

DirectoryWorkspace::DirectoryWorkspace(fs::path root) : root_(std::move(root)) {}

std::optional<std::string> DirectoryWorkspace::read(const std::string& path) const {
  std::ifstream f(root_ / path, std::ios::binary);
  if (!f) return std::nullopt;
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void DirectoryWorkspace::write(const std::string& path, const std::string& text) {
  store::write_atomic(root_ / path, text);
}

void DirectoryWorkspace::remove(const std::string& path) {
  std::error_code ec;
  fs::remove(root_ / path, ec);
  if (ec) throw Error(ErrorCode::StorageFailure, "cannot remove " + path + ": " + ec.message());
}

std::optional<std::string> MemoryWorkspace::read(const std::string& path) const {
  auto it = files_.find(path);
  if (it == files_.end()) return std::nullopt;
  return it->second;
}

void MemoryWorkspace::write(const std::string& path, const std::string& text) {
  if (fail_after_ == 0) {
    fail_after_ = -1;
    throw Error(ErrorCode::StorageFailure, "injected write failure for " + path);
  }
  if (fail_after_ > 0) --fail_after_;
  auto c = corrupt_.find(path);
  if (c != corrupt_.end()) {
    files_[path] = c->second;
    corrupt_.erase(c);
    return;
  }
  files_[path] = text;
}

void MemoryWorkspace::remove(const std::string& path) { files_.erase(path); }

// ---- apply --------------------------------------------------------------------

namespace {

std::multiset<std::string> diagnostic_messages(const std::vector<syntax::Diagnostic>& diags) {
  std::multiset<std::string> out;
  for (const auto& d : diags) out.insert(d.message);
  return out;
}

bool passes(const verify::Verdict& v) {
  return v.syntactic_outcome == verify::Outcome::Pass;
}

}  // namespace

ApplyResult apply_fix(Workspace& ws, const index::CodebaseIndex& current, const FixPlan& plan,
                      const store::SpecStore& store) {
  // Staleness: the plan was computed against the index, which must match disk.
  for (const auto& [path, hash] : plan.file_hashes) {
    auto on_disk = ws.read(path);
    if (!on_disk || !current.contains(path) || sha256_hex(*on_disk) != hash ||
        *on_disk != current.text(path))
      throw FixError(ErrorCode::StaleSnapshot, path + " changed since the fix was planned; re-run the scan");
  }
  for (const auto& [path, _] : plan.creates_files)
    if (ws.read(path) || current.contains(path))
      throw FixError(ErrorCode::StaleSnapshot, path + " already exists; re-run the scan");

  const auto after = preview(current, plan);
  std::map<std::string, std::string> originals;
  for (const auto& [path, _] : after)
    if (!plan.creates_files.count(path)) originals[path] = std::string(current.text(path));

  std::vector<std::string> written;
  auto rollback = [&] {
    for (const auto& path : written) {
      try {
        if (plan.creates_files.count(path))
          ws.remove(path);
        else
          ws.write(path, originals.at(path));
      } catch (const Error&) {
        // Keep restoring the remaining files.
      }
    }
  };
  auto fail = [&](ErrorCode code, const std::string& msg, std::vector<std::string> ids = {}) {
    rollback();
    throw FixError(code, msg, std::move(ids));
  };

  std::map<std::string, std::optional<std::string>> changed;
  try {
    for (const auto& [path, text] : after) {
      written.push_back(path);
      ws.write(path, text);
    }
    for (const auto& [path, text] : after) {
      auto back = ws.read(path);
      if (!back) fail(ErrorCode::StorageFailure, path + " vanished after writing");
      changed[path] = *back;
    }
  } catch (const FixError&) {
    throw;
  } catch (const Error& e) {
    fail(ErrorCode::StorageFailure, e.message());
  }

  for (const auto& [path, text] : changed) {
    std::multiset<std::string> before_diags;
    if (current.contains(path)) before_diags = diagnostic_messages(current.diagnostics(path));
    std::multiset<std::string> after_diags;
    try {
      after_diags = diagnostic_messages(syntax::parse_file(path, *text, current.options().parse).diagnostics);
    } catch (const Error& e) {
      fail(ErrorCode::PostEditParseFailure, path + ": " + e.message());
    }
    if (!std::includes(before_diags.begin(), before_diags.end(), after_diags.begin(), after_diags.end()))
      fail(ErrorCode::PostEditParseFailure, path + " no longer parses cleanly after the edit");
  }

  ApplyResult result{index::update_index(current, changed), {}, std::nullopt};
  for (const auto& [path, _] : changed) result.touched.push_back(path);

  if (const SpecRecord* origin = store.find(plan.record_id)) {
    auto v = verify::check_spec(result.index, *origin);
    if (!passes(v)) fail(ErrorCode::RegressionDetected, "record " + origin->id + " still fails after the fix", {origin->id});
    result.origin = std::move(v);
  }

  std::vector<std::string> regressed;
  for (const auto& r : store.records()) {
    if (r.status != Status::Accepted || r.id == plan.record_id) continue;
    if (!passes(verify::check_spec(current, r))) continue;
    const auto o = verify::check_spec(result.index, r).syntactic_outcome;
    if (o == verify::Outcome::Fail || o == verify::Outcome::NotApplicable) regressed.push_back(r.id);
  }
  if (!regressed.empty()) {
    std::string ids;
    for (const auto& id : regressed) ids += (ids.empty() ? "" : ", ") + id;
    fail(ErrorCode::RegressionDetected, "the fix breaks accepted records: " + ids, regressed);
  }
  return result;
}

}  // namespace vibeguard::fix
