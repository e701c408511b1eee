#include "gramfuzz/campaign.hpp"

#include <omp.h>

#include <algorithm>
#include <atomic>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

#include "gramfuzz/parse_tree.hpp"
#include "gramfuzz/trim.hpp"

namespace gramfuzz {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

volatile std::sig_atomic_t g_stop_requested = 0;

Bytes read_file(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw CampaignError("cannot read " + p.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, ByteView data) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  if (!f) throw CampaignError("cannot write " + p.string());
  f.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!f) throw CampaignError("cannot write " + p.string());
}

std::string safe_name(std::string_view key) {
  std::string out;
  for (char c : key) {
    bool ok = is_alnum_byte(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
    out += ok ? c : '_';
  }
  if (out.empty() || out.front() == '.') out.insert(out.begin(), '_');
  return out.substr(0, 120);
}

double ms(std::chrono::nanoseconds d) { return static_cast<double>(d.count()) / 1e6; }

std::string fmt_ms(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

}  // namespace

void request_campaign_stop() { g_stop_requested = 1; }

const char* to_string(DictionaryMode m) {
  switch (m) {
    case DictionaryMode::enhanced: return "enhanced";
    case DictionaryMode::naive: return "naive";
    case DictionaryMode::off: return "off";
  }
  return "?";
}

BatchRunner::BatchRunner(const TargetSpec& spec, unsigned workers) {
  if (workers == 0) throw CampaignError("worker count must be at least 1");
  for (unsigned i = 0; i < workers; ++i) slots_.push_back(std::make_unique<Executor>(spec));
}

CompactResult BatchRunner::guarded(Executor& ex, ByteView input) {
  try {
    return ex.run_compact(input);
  } catch (const ExecError& e) {
#pragma omp critical(gramfuzz_runner_errors)
    {
      ++exec_errors_;
      last_error_ = e.what();
    }
    CompactResult r;
    r.signature = signature(SparseCoverage{});
    return r;
  }
}

std::vector<CompactResult> BatchRunner::run_serial(const std::vector<Bytes>& inputs) {
  std::vector<CompactResult> out;
  out.reserve(inputs.size());
  for (const auto& in : inputs) out.push_back(guarded(*slots_.front(), in));
  return out;
}

std::vector<CompactResult> BatchRunner::run_parallel(const std::vector<Bytes>& inputs) {
  std::vector<CompactResult> out(inputs.size());
  const auto n = static_cast<std::ptrdiff_t>(inputs.size());
#pragma omp parallel num_threads(static_cast<int>(slots_.size()))
  {
    Executor& ex = *slots_[static_cast<std::size_t>(omp_get_thread_num()) % slots_.size()];
#pragma omp for schedule(dynamic, 4)
    for (std::ptrdiff_t i = 0; i < n; ++i)
      out[static_cast<std::size_t>(i)] = guarded(ex, inputs[static_cast<std::size_t>(i)]);
  }
  return out;
}

std::vector<CompactResult> BatchRunner::run(const std::vector<Bytes>& inputs) {
  return slots_.size() > 1 ? run_parallel(inputs) : run_serial(inputs);
}

DistillResult distill_corpus(const std::vector<Bytes>& seeds, BatchRunner& runner) {
  if (seeds.empty()) throw CampaignError("no seeds to distill");
  DistillResult res;
  res.results = runner.run(seeds);

  std::vector<std::size_t> cand;
  std::unordered_set<Bytes> seen;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (res.results[i].status != ExecStatus::ok) {
      res.crashed.push_back(i);
      continue;
    }
    if (seen.insert(seeds[i]).second) cand.push_back(i);
  }
  if (cand.empty()) throw CampaignError("every seed crashed or hung; nothing to fuzz");

  std::vector<std::vector<std::uint16_t>> edges(seeds.size());
  for (auto i : cand)
    for (auto [idx, cnt] : res.results[i].cells) edges[i].push_back(idx);

  std::vector<bool> covered(kMapSize, false);
  std::vector<bool> taken(seeds.size(), false);
  for (;;) {
    std::size_t best = seeds.size(), best_gain = 0;
    for (auto i : cand) {
      if (taken[i]) continue;
      std::size_t gain = 0;
      for (auto e : edges[i]) gain += covered[e] ? 0 : 1;
      if (gain == 0) continue;
      bool better = gain > best_gain ||
                    (gain == best_gain && seeds[i].size() < seeds[best].size());
      if (best == seeds.size() || better) {
        best = i;
        best_gain = gain;
      }
    }
    if (best == seeds.size()) break;
    taken[best] = true;
    for (auto e : edges[best]) covered[e] = true;
  }
  for (auto i : cand)
    if (taken[i]) res.kept.push_back(i);
  if (res.kept.empty()) {
    // No seed reports any edge: keep the smallest so there is something to fuzz.
    std::size_t best = cand.front();
    for (auto i : cand)
      if (seeds[i].size() < seeds[best].size()) best = i;
    res.kept.push_back(best);
  }
  return res;
}

std::vector<Bytes> distill_corpus(const std::vector<Bytes>& seeds, const TargetSpec& target) {
  BatchRunner runner(target, 1);
  auto r = distill_corpus(seeds, runner);
  std::vector<Bytes> out;
  for (auto i : r.kept) out.push_back(seeds[i]);
  return out;
}

Bytes strip_comments(ByteView input, const GrammarSpec& g) {
  auto pr = parse(g, input);
  if (!pr) return Bytes(input);
  TokenStream ts;
  if (tokenize(g, input, ts)) return Bytes(input);
  auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; };
  Bytes out;
  std::size_t pos = 0;
  bool changed = false;
  for (const auto& t : ts.trivia) {
    if (!g.is_comment_token(t.kind)) continue;
    out.append(input.substr(pos, t.span.start - pos));
    std::size_t after = t.span.end;
    bool left = !out.empty() && !is_space(out.back());
    bool right = after < input.size() && !is_space(input[after]);
    if (left && right) out += ' ';
    pos = after;
    changed = true;
  }
  if (!changed) return Bytes(input);
  out.append(input.substr(pos));
  if (!parse(g, out)) return Bytes(input);
  return out;
}

std::vector<Bytes> load_seed_dirs(const std::vector<fs::path>& dirs) {
  std::vector<Bytes> out;
  for (const auto& d : dirs) {
    std::error_code ec;
    if (fs::is_regular_file(d, ec)) {
      out.push_back(read_file(d));
      continue;
    }
    if (!fs::is_directory(d, ec)) throw CampaignError("seed path not found: " + d.string());
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(d))
      if (e.is_regular_file()) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      Bytes b = read_file(f);
      if (!b.empty()) out.push_back(std::move(b));
    }
  }
  return out;
}

namespace {

struct StopCampaign {};

constexpr std::size_t kChunkPerWorker = 256;

class Campaign {
 public:
  Campaign(const CampaignConfig& cfg, const CampaignHooks& hooks)
      : cfg_(cfg),
        hooks_(hooks),
        grammar_(load_grammar_file(cfg.grammar_path)),
        runner_(cfg.target, cfg.workers),
        rng_(cfg.rng_seed) {}

  CampaignReport run();

 private:
  void prepare_output();
  void seed_queue();
  void fuzz_one(std::size_t idx);
  void emit(ByteView mutant, Strategy tag);
  void flush();
  void handle(const Bytes& input, const CompactResult& r, Strategy tag);
  void record_failure(const Bytes& input, const CompactResult& r, Strategy tag);
  void admit(Bytes data, const CompactResult& r, Strategy tag, std::optional<std::uint64_t> parent);
  bool parses(ByteView data, Strategy tag);
  void write_queue_file(const QueueEntry& e);
  void write_stats();
  void maybe_status(bool force);
  CampaignStatus status() const;
  bool out_of_time() const;
  void run_stage(Strategy tag, const std::function<void()>& body);

  const CampaignConfig& cfg_;
  const CampaignHooks& hooks_;
  GrammarSpec grammar_;
  BatchRunner runner_;
  Rng rng_;
  GlobalCoverage global_;
  Dictionary dict_;
  std::vector<QueueEntry> queue_;
  StatsTable total_{};
  StatsTable cycle_stats_{};
  std::vector<std::pair<std::uint64_t, StatsTable>> cycle_rows_;
  std::vector<CrashRecord> crashes_, hangs_;
  std::unordered_map<std::string, std::size_t> crash_index_, hang_index_;
  std::vector<std::uint64_t> admitted_;

  std::vector<Bytes> pending_;
  std::vector<Strategy> pending_tags_;
  std::optional<std::uint64_t> current_parent_;
  std::chrono::nanoseconds flush_time_{0};

  std::uint64_t execs_ = 0, seed_execs_ = 0, trim_execs_ = 0;
  std::uint64_t cycle_ = 0, cycles_done_ = 0;
  bool stopped_by_limit_ = false;
  Clock::time_point start_, last_status_;
  std::ofstream admissions_, dict_log_;
};

void Campaign::prepare_output() {
  std::error_code ec;
  if (fs::exists(cfg_.out_dir, ec) && !fs::is_empty(cfg_.out_dir, ec))
    throw CampaignError("output directory is not empty: " + cfg_.out_dir.string());
  for (const char* sub : {"queue", "crashes", "hangs"}) {
    fs::create_directories(cfg_.out_dir / sub, ec);
    if (ec) throw CampaignError("cannot create " + (cfg_.out_dir / sub).string() + ": " + ec.message());
  }
  write_file(cfg_.out_dir / "manifest.json", manifest_json(cfg_));
  admissions_.open(cfg_.out_dir / "admissions.csv", std::ios::trunc);
  admissions_ << "id,exec,strategy,parent,hash,size\n";
  dict_log_.open(cfg_.out_dir / "dictionary.csv", std::ios::trunc);
  dict_log_ << "entry,size,tokens,enhanced,naive\n";
  if (!admissions_ || !dict_log_) throw CampaignError("cannot write to " + cfg_.out_dir.string());
}

bool Campaign::parses(ByteView data, Strategy tag) {
  auto t0 = Clock::now();
  bool ok = parse(grammar_, data).ok();
  total_[static_cast<std::size_t>(tag)].parse_time += Clock::now() - t0;
  cycle_stats_[static_cast<std::size_t>(tag)].parse_time += Clock::now() - t0;
  return ok;
}

void Campaign::write_queue_file(const QueueEntry& e) {
  char name[64];
  std::snprintf(name, sizeof name, "id%06llu_%s", static_cast<unsigned long long>(e.id),
                to_string(e.strategy));
  write_file(cfg_.out_dir / "queue" / name, e.data);
}

void Campaign::admit(Bytes data, const CompactResult& r, Strategy tag,
                     std::optional<std::uint64_t> parent) {
  QueueEntry e;
  e.id = queue_.size();
  e.signature = r.signature;
  e.parent = parent;
  e.strategy = tag;
  e.exec_time = r.exec_time;
  e.found_at_exec = execs_;
  e.parses = parses(data, tag);
  e.data = std::move(data);
  write_queue_file(e);
  std::uint64_t h = fnv1a64(e.data);
  admitted_.push_back(h);
  admissions_ << e.id << ',' << e.found_at_exec << ',' << to_string(tag) << ','
              << (parent ? std::to_string(*parent) : std::string()) << ',' << to_hex(h) << ','
              << e.data.size() << '\n';
  queue_.push_back(std::move(e));
  if (hooks_.on_admit) hooks_.on_admit(queue_.back(), r);
}

void Campaign::record_failure(const Bytes& input, const CompactResult& r, Strategy tag) {
  bool crash = r.status == ExecStatus::crash;
  std::string key = r.crash_token ? *r.crash_token : "sig-" + to_hex(r.signature.digest);
  auto& records = crash ? crashes_ : hangs_;
  auto& index = crash ? crash_index_ : hang_index_;
  auto it = index.find(key);
  if (it != index.end()) {
    ++records[it->second].count;
    return;
  }
  CrashRecord rec;
  rec.key = key;
  rec.status = r.status;
  rec.found_at_exec = execs_;
  rec.strategy = tag;
  rec.count = 1;
  rec.file = cfg_.out_dir / (crash ? "crashes" : "hangs") / safe_name(key);
  write_file(rec.file, input);
  index.emplace(key, records.size());
  records.push_back(std::move(rec));
}

void Campaign::handle(const Bytes& input, const CompactResult& r, Strategy tag) {
  if (r.status != ExecStatus::ok) {
    record_failure(input, r, tag);
    return;
  }
  if (global_.classify(r.cells) == Novelty::none) return;
  auto i = static_cast<std::size_t>(tag);
  ++total_[i].interesting;
  ++cycle_stats_[i].interesting;
  admit(input, r, tag, current_parent_);
}

bool Campaign::out_of_time() const {
  if (g_stop_requested) return true;
  if (!cfg_.minutes) return false;
  auto limit = std::chrono::duration<double>(*cfg_.minutes * 60.0);
  return Clock::now() - start_ >= limit;
}

void Campaign::flush() {
  if (pending_.empty()) return;
  auto t0 = Clock::now();
  bool exhausted = false;
  if (cfg_.max_execs) {
    std::uint64_t left = *cfg_.max_execs > execs_ ? *cfg_.max_execs - execs_ : 0;
    if (left <= pending_.size()) {
      pending_.resize(left);
      pending_tags_.resize(left);
      exhausted = true;
    }
  }
  auto results = runner_.run(pending_);
  for (std::size_t k = 0; k < results.size(); ++k) {
    ++execs_;
    auto i = static_cast<std::size_t>(pending_tags_[k]);
    ++total_[i].generated;
    ++cycle_stats_[i].generated;
    total_[i].exec_time += results[k].exec_time;
    cycle_stats_[i].exec_time += results[k].exec_time;
    handle(pending_[k], results[k], pending_tags_[k]);
  }
  pending_.clear();
  pending_tags_.clear();
  flush_time_ += Clock::now() - t0;
  maybe_status(false);
  if (exhausted || out_of_time()) {
    stopped_by_limit_ = true;
    throw StopCampaign{};
  }
}

void Campaign::emit(ByteView mutant, Strategy tag) {
  pending_.emplace_back(mutant);
  pending_tags_.push_back(tag);
  if (pending_.size() >= kChunkPerWorker * runner_.workers()) flush();
}

void Campaign::run_stage(Strategy tag, const std::function<void()>& body) {
  auto t0 = Clock::now();
  auto f0 = flush_time_;
  try {
    body();
    flush();
  } catch (...) {
    auto d = (Clock::now() - t0) - (flush_time_ - f0);
    total_[static_cast<std::size_t>(tag)].mutate_time += d;
    throw;
  }
  auto d = (Clock::now() - t0) - (flush_time_ - f0);
  auto i = static_cast<std::size_t>(tag);
  total_[i].mutate_time += d;
  cycle_stats_[i].mutate_time += d;
  ++total_[i].applications;
  ++cycle_stats_[i].applications;
}

void Campaign::fuzz_one(std::size_t idx) {
  current_parent_ = queue_[idx].id;

  if (!queue_[idx].trimmed) {
    const CoverageSignature original = queue_[idx].signature;
    TrimOracle oracle = [&](ByteView c) {
      if ((cfg_.max_execs && execs_ >= *cfg_.max_execs) || out_of_time()) {
        stopped_by_limit_ = true;
        throw StopCampaign{};
      }
      CompactResult r = runner_.primary().run_compact(c);
      ++execs_;
      ++trim_execs_;
      if (r.status != ExecStatus::ok)
        return CoverageSignature{~original.digest ^ static_cast<std::uint64_t>(r.status)};
      return r.signature;
    };
    Bytes data = queue_[idx].data;
    TrimOutcome t = cfg_.grammar_trim ? tree_trim(data, grammar_, oracle, original)
                                      : builtin_trim(data, oracle, original);
    QueueEntry& e = queue_[idx];
    e.trimmed = true;
    if (t.trimmed != e.data && !t.trimmed.empty()) {
      e.data = std::move(t.trimmed);
      e.parses = t.mode == TrimMode::tree ? true : parse(grammar_, e.data).ok();
      write_queue_file(e);
    }
  }

  const Bytes data = queue_[idx].data;

  if (cfg_.deterministic && !queue_[idx].det_done) {
    DeterministicOptions opt{cfg_.skip_redundant};
    for (Strategy s : kDeterministicStages)
      run_stage(s, [&] { for_each_deterministic(data, s, [&](ByteView m) { emit(m, s); }, opt); });

    if (cfg_.dictionary != DictionaryMode::off && !dict_.empty()) {
      dict_log_ << queue_[idx].id << ',' << data.size() << ',' << dict_.size() << ','
                << count_dictionary_mutants(data, dict_) << ','
                << count_naive_dictionary_mutants(data, dict_) << '\n';
      DictSink sink = [&](ByteView m, DictOp op, const DictEntry& e) {
        emit(m, dictionary_strategy(op, e.origin));
      };
      // The four dictionary tags share one pass; time is booked to "uo".
      run_stage(Strategy::uo, [&] {
        if (cfg_.dictionary == DictionaryMode::enhanced)
          for_each_dictionary_mutant(data, dict_, sink);
        else
          for_each_naive_dictionary_mutant(data, dict_, sink);
      });
    }
    queue_[idx].det_done = true;
  }

  run_stage(Strategy::havoc, [&] {
    for (std::size_t k = 0; k < cfg_.havoc_budget; ++k) emit(havoc_one(data, rng_), Strategy::havoc);
  });

  if (queue_.size() >= 2 && cfg_.splice_rounds > 0) {
    run_stage(Strategy::splice, [&] {
      for (std::size_t k = 0; k < cfg_.splice_rounds; ++k) {
        std::optional<Bytes> sp;
        for (int tries = 0; tries < 8 && !sp; ++tries) {
          std::size_t p = rng_.below(queue_.size());
          if (p == idx) continue;
          sp = splice_inputs(data, queue_[p].data, rng_);
        }
        if (!sp) break;
        emit(havoc_one(*sp, rng_), Strategy::splice);
      }
    });
  }

  if (cfg_.tree_mutation && queue_[idx].parses) {
    std::size_t p = rng_.below(queue_.size());
    const Bytes partner = queue_[p].data;
    auto t0 = Clock::now();
    auto tar = parse(grammar_, data);
    std::optional<ParseResult> pro;
    if (partner.size() <= TreeMutationLimits{}.max_input_bytes) pro = parse(grammar_, partner);
    auto parse_time = Clock::now() - t0;
    total_[static_cast<std::size_t>(Strategy::tree)].parse_time += parse_time;
    cycle_stats_[static_cast<std::size_t>(Strategy::tree)].parse_time += parse_time;
    if (tar) {
      TreeMutationLimits lim;
      lim.same_kind = cfg_.tree_same_kind;
      run_stage(Strategy::tree, [&] {
        auto batch = tree_mutate(*tar.tree, pro && *pro ? &*pro->tree : nullptr, rng_, lim);
        for (const auto& m : batch.mutants) emit(m, Strategy::tree);
      });
    }
  }
}

void Campaign::seed_queue() {
  std::vector<Bytes> seeds = load_seed_dirs(cfg_.seed_dirs);
  if (seeds.empty()) throw CampaignError("no seed inputs found");

  std::vector<Bytes> kept;
  std::vector<CompactResult> results;
  if (cfg_.distill) {
    auto d = distill_corpus(seeds, runner_);
    seed_execs_ += seeds.size();
    for (auto i : d.kept) {
      kept.push_back(seeds[i]);
      results.push_back(d.results[i]);
    }
    for (auto i : d.crashed) record_failure(seeds[i], d.results[i], Strategy::seed);
  } else {
    kept = seeds;
    results = runner_.run(seeds);
    seed_execs_ += seeds.size();
  }
  execs_ += seed_execs_;

  if (cfg_.strip_seed_comments) {
    std::vector<std::size_t> changed;
    std::vector<Bytes> redo;
    for (std::size_t i = 0; i < kept.size(); ++i) {
      Bytes s = strip_comments(kept[i], grammar_);
      if (s != kept[i] && !s.empty()) {
        kept[i] = std::move(s);
        changed.push_back(i);
        redo.push_back(kept[i]);
      }
    }
    if (!redo.empty()) {
      auto rr = runner_.run(redo);
      seed_execs_ += redo.size();
      execs_ += redo.size();
      for (std::size_t k = 0; k < changed.size(); ++k) results[changed[k]] = std::move(rr[k]);
    }
  }

  current_parent_.reset();
  for (std::size_t i = 0; i < kept.size(); ++i) {
    if (results[i].status != ExecStatus::ok) {
      record_failure(kept[i], results[i], Strategy::seed);
      continue;
    }
    global_.classify(results[i].cells);
    admit(kept[i], results[i], Strategy::seed, std::nullopt);
  }
  if (queue_.empty()) throw CampaignError("every seed crashed or hung; nothing to fuzz");

  if (cfg_.dict_path) merge_dictionary(dict_, load_dictionary_file(*cfg_.dict_path));
  if (cfg_.auto_dictionary) {
    std::vector<Bytes> corpus;
    for (const auto& e : queue_) corpus.push_back(e.data);
    merge_dictionary(dict_, extract_auto_tokens(corpus, grammar_));
  }
  std::ofstream dump(cfg_.out_dir / "dictionary.txt", std::ios::trunc);
  for (const auto& e : dict_.entries())
    dump << (e.origin == DictEntry::Origin::user ? "user" : "auto") << "=\"" << escape_token(e.token)
         << "\"\n";
}

void Campaign::write_stats() {
  std::ostringstream s;
  s << "cycle,strategy,generated,interesting,parse_ms,mutate_ms,exec_ms\n";
  for (const auto& [cyc, table] : cycle_rows_) {
    for (std::size_t i = 1; i < kStrategyCount; ++i) {
      const auto& st = table[i];
      s << cyc << ',' << to_string(static_cast<Strategy>(i)) << ',' << st.generated << ','
        << st.interesting << ',';
      if (cfg_.deterministic_stats)
        s << "0,0,0\n";
      else
        s << fmt_ms(ms(st.parse_time)) << ',' << fmt_ms(ms(st.mutate_time)) << ','
          << fmt_ms(ms(st.exec_time)) << '\n';
    }
  }
  write_file(cfg_.out_dir / "stats.csv", s.str());

  std::ostringstream t;
  t << "strategy,applications,generated,interesting,parse_ms,mutate_ms,exec_ms\n";
  for (std::size_t i = 1; i < kStrategyCount; ++i) {
    const auto& st = total_[i];
    t << to_string(static_cast<Strategy>(i)) << ',' << st.applications << ',' << st.generated << ','
      << st.interesting << ',' << fmt_ms(ms(st.parse_time)) << ',' << fmt_ms(ms(st.mutate_time))
      << ',' << fmt_ms(ms(st.exec_time)) << '\n';
  }
  write_file(cfg_.out_dir / "timing.csv", t.str());
}

CampaignStatus Campaign::status() const {
  CampaignStatus st;
  st.cycle = cycle_;
  st.execs = execs_;
  st.queue_size = queue_.size();
  st.edges = global_.edges_covered();
  st.crashes = crashes_.size();
  st.hangs = hangs_.size();
  st.elapsed = Clock::now() - start_;
  return st;
}

void Campaign::maybe_status(bool force) {
  if (!hooks_.on_status) return;
  auto now = Clock::now();
  if (!force && now - last_status_ < hooks_.status_interval) return;
  last_status_ = now;
  hooks_.on_status(status());
}

CampaignReport Campaign::run() {
  g_stop_requested = 0;
  start_ = last_status_ = Clock::now();
  prepare_output();
  seed_queue();
  maybe_status(true);

  try {
    while (!cfg_.cycles || cycle_ < *cfg_.cycles) {
      if ((cfg_.max_execs && execs_ >= *cfg_.max_execs) || out_of_time()) {
        stopped_by_limit_ = true;
        break;
      }
      cycle_stats_ = {};
      for (std::size_t idx = 0; idx < queue_.size(); ++idx) fuzz_one(idx);
      ++cycle_;
      cycle_rows_.emplace_back(cycle_, cycle_stats_);
      cycles_done_ = cycle_;
      write_stats();
      maybe_status(true);
    }
  } catch (const StopCampaign&) {
    pending_.clear();
    pending_tags_.clear();
    cycle_rows_.emplace_back(cycle_ + 1, cycle_stats_);
  }
  write_stats();
  admissions_.flush();
  dict_log_.flush();
  maybe_status(true);

  CampaignReport rep;
  rep.total_execs = execs_;
  rep.seed_execs = seed_execs_;
  rep.trim_execs = trim_execs_;
  rep.cycles_completed = cycles_done_;
  rep.edges = global_.edges_covered();
  rep.queue = std::move(queue_);
  rep.crashes = std::move(crashes_);
  rep.hangs = std::move(hangs_);
  rep.stats = total_;
  rep.admitted_hashes = std::move(admitted_);
  rep.elapsed = Clock::now() - start_;
  rep.stopped_by_limit = stopped_by_limit_;
  return rep;
}

}  // namespace

CampaignReport run_campaign(const CampaignConfig& cfg, const CampaignHooks& hooks) {
  if (cfg.out_dir.empty()) throw CampaignError("no output directory given");
  if (cfg.seed_dirs.empty()) throw CampaignError("no seed directory given");
  if (cfg.havoc_budget > 1u << 20) throw CampaignError("havoc budget too large");
  Campaign c(cfg, hooks);
  return c.run();
}

std::string manifest_json(const CampaignConfig& cfg) {
  nlohmann::ordered_json j;
  j["version"] = kManifestVersion;
  j["grammar"] = fs::absolute(cfg.grammar_path).lexically_normal().string();
  {
    std::error_code ec;
    if (fs::is_regular_file(cfg.grammar_path, ec))
      j["grammar_fnv1a64"] = to_hex(fnv1a64(read_file(cfg.grammar_path)));
  }
  nlohmann::ordered_json t;
  t["kind"] = cfg.target.kind == TargetSpec::Kind::in_process ? "in_process" : "external_command";
  t["name"] = cfg.target.name;
  t["command"] = cfg.target.command;
  t["timeout_ms"] = cfg.target.timeout.count();
  t["isolation"] = cfg.target.isolation == Isolation::direct ? "direct" : "fork_server";
  j["target"] = t;
  std::vector<std::string> seeds;
  for (const auto& s : cfg.seed_dirs) seeds.push_back(fs::absolute(s).lexically_normal().string());
  j["seed_dirs"] = seeds;
  j["out_dir"] = fs::absolute(cfg.out_dir).lexically_normal().string();
  j["dict"] = cfg.dict_path ? nlohmann::ordered_json(fs::absolute(*cfg.dict_path).string())
                            : nlohmann::ordered_json(nullptr);
  j["rng_seed"] = cfg.rng_seed;
  j["workers"] = cfg.workers;
  j["havoc_budget"] = cfg.havoc_budget;
  j["splice_rounds"] = cfg.splice_rounds;
  j["cycles"] = cfg.cycles ? nlohmann::ordered_json(*cfg.cycles) : nlohmann::ordered_json(nullptr);
  j["minutes"] = cfg.minutes ? nlohmann::ordered_json(*cfg.minutes) : nlohmann::ordered_json(nullptr);
  j["max_execs"] = cfg.max_execs ? nlohmann::ordered_json(*cfg.max_execs) : nlohmann::ordered_json(nullptr);
  j["tree_mutation"] = cfg.tree_mutation;
  j["tree_same_kind"] = cfg.tree_same_kind;
  j["grammar_trim"] = cfg.grammar_trim;
  j["dictionary"] = to_string(cfg.dictionary);
  j["auto_dictionary"] = cfg.auto_dictionary;
  j["deterministic"] = cfg.deterministic;
  j["skip_redundant"] = cfg.skip_redundant;
  j["distill"] = cfg.distill;
  j["strip_seed_comments"] = cfg.strip_seed_comments;
  j["deterministic_stats"] = cfg.deterministic_stats;
  j["tree_limits"] = {{"max_input_bytes", TreeMutationLimits{}.max_input_bytes},
                      {"max_subtree_bytes", TreeMutationLimits{}.max_subtree_bytes},
                      {"max_pool", TreeMutationLimits{}.max_pool},
                      {"max_mutants", TreeMutationLimits{}.max_mutants}};
  j["rng"] = "mt19937_64";
  return j.dump(2) + "\n";
}

CampaignConfig config_from_manifest(const fs::path& manifest) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(manifest));
  } catch (const nlohmann::json::exception& e) {
    throw CampaignError("bad manifest " + manifest.string() + ": " + e.what());
  }
  try {
    if (j.at("version") != kManifestVersion) throw CampaignError("unsupported manifest version");
    CampaignConfig c;
    c.grammar_path = j.at("grammar").get<std::string>();
    const auto& t = j.at("target");
    if (t.at("kind") == "in_process") {
      auto bt = builtin_target(t.at("name").get<std::string>());
      if (!bt) throw CampaignError("target not found: " + t.at("name").get<std::string>());
      c.target = *bt;
    } else {
      c.target.kind = TargetSpec::Kind::external_command;
      c.target.name = t.at("name").get<std::string>();
      c.target.command = t.at("command").get<std::vector<std::string>>();
    }
    c.target.timeout = std::chrono::milliseconds(t.at("timeout_ms").get<long long>());
    c.target.isolation = t.at("isolation") == "direct" ? Isolation::direct : Isolation::fork_server;
    for (const auto& s : j.at("seed_dirs")) c.seed_dirs.emplace_back(s.get<std::string>());
    c.out_dir = j.at("out_dir").get<std::string>();
    if (!j.at("dict").is_null()) c.dict_path = j.at("dict").get<std::string>();
    c.rng_seed = j.at("rng_seed").get<std::uint64_t>();
    c.workers = j.at("workers").get<unsigned>();
    c.havoc_budget = j.at("havoc_budget").get<std::size_t>();
    c.splice_rounds = j.at("splice_rounds").get<std::size_t>();
    if (!j.at("cycles").is_null()) c.cycles = j.at("cycles").get<std::uint64_t>();
    if (!j.at("minutes").is_null()) c.minutes = j.at("minutes").get<double>();
    if (!j.at("max_execs").is_null()) c.max_execs = j.at("max_execs").get<std::uint64_t>();
    c.tree_mutation = j.at("tree_mutation").get<bool>();
    c.tree_same_kind = j.at("tree_same_kind").get<bool>();
    c.grammar_trim = j.at("grammar_trim").get<bool>();
    std::string dm = j.at("dictionary").get<std::string>();
    c.dictionary = dm == "naive" ? DictionaryMode::naive
                   : dm == "off" ? DictionaryMode::off
                                 : DictionaryMode::enhanced;
    c.auto_dictionary = j.at("auto_dictionary").get<bool>();
    c.deterministic = j.at("deterministic").get<bool>();
    c.skip_redundant = j.at("skip_redundant").get<bool>();
    c.distill = j.at("distill").get<bool>();
    c.strip_seed_comments = j.at("strip_seed_comments").get<bool>();
    c.deterministic_stats = j.at("deterministic_stats").get<bool>();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw CampaignError("bad manifest " + manifest.string() + ": " + e.what());
  }
}

std::vector<std::uint64_t> read_admitted_hashes(const fs::path& out_dir) {
  std::ifstream f(out_dir / "admissions.csv");
  if (!f) throw CampaignError("cannot read " + (out_dir / "admissions.csv").string());
  std::vector<std::uint64_t> out;
  std::string line;
  std::getline(f, line);
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    // id,exec,strategy,parent,hash,size
    std::size_t c = 0, pos = 0;
    while (c < 4 && pos != std::string::npos) {
      pos = line.find(',', pos);
      if (pos != std::string::npos) ++pos;
      ++c;
    }
    if (pos == std::string::npos) throw CampaignError("corrupt admissions.csv");
    out.push_back(std::stoull(line.substr(pos, 16), nullptr, 16));
  }
  return out;
}

}  // namespace gramfuzz
