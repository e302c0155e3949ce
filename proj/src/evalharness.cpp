// SPDX-License-Identifier: Apache-2.0
#include "occ/evalharness.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>

namespace occ {

namespace {

template <typename Seq>
int64_t levenshtein(const Seq& a, const Seq& b) {
  size_t n = a.size(), m = b.size();
  if (n == 0) return static_cast<int64_t>(m);
  if (m == 0) return static_cast<int64_t>(n);
  std::vector<int64_t> prev(m + 1), cur(m + 1);
  for (size_t j = 0; j <= m; ++j) prev[j] = static_cast<int64_t>(j);
  for (size_t i = 1; i <= n; ++i) {
    cur[0] = static_cast<int64_t>(i);
    for (size_t j = 1; j <= m; ++j) {
      int64_t sub = prev[j - 1] + (a[i - 1] != b[j - 1]);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

double precision_of(int64_t ed, size_t la, size_t lb) {
  double denom = static_cast<double>(std::max({la, lb, size_t(1)}));
  return 1.0 - static_cast<double>(ed) / denom;
}

const char* stop_name(StopReason r) { return r == StopReason::eos ? "eos" : "max_len"; }

}  // namespace

int64_t edit_distance(const std::string& a, const std::string& b) { return levenshtein(a, b); }

std::string normalize_ws(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  bool in_ws = false;
  for (unsigned char c : s) {
    if (std::isspace(c)) {
      in_ws = true;
      continue;
    }
    if (in_ws && !out.empty()) out.push_back(' ');
    in_ws = false;
    out.push_back(static_cast<char>(c));
  }
  return out;
}

double decode_precision(const std::string& gt, const std::string& pred) {
  std::string a = normalize_ws(gt), b = normalize_ws(pred);
  return precision_of(edit_distance(a, b), a.size(), b.size());
}

double token_precision(const std::string& gt, const std::string& pred) {
  std::vector<int> a = tokenize(normalize_ws(gt)).ids;
  std::vector<int> b = tokenize(normalize_ws(pred)).ids;
  return precision_of(levenshtein(a, b), a.size(), b.size());
}

DocDecoder echo_decoder() {
  return [](const Sample& s) { return DocDecode{s.text, StopReason::eos}; };
}

DocDecoder empty_decoder() {
  return [](const Sample&) { return DocDecode{"", StopReason::eos}; };
}

DocDecoder model_decoder(const Encoder<float>& enc, const Decoder<float>& dec) {
  return [&enc, &dec](const Sample& s) {
    LatentSeq z = enc.encode(s.views, nullptr, nullptr);
    int max_new = static_cast<int>(s.target.size()) + 63;  // target includes EOS
    GenResult g = dec.generate_greedy(z, max_new);
    std::string text;
    text.reserve(g.ids.size());
    for (int id : g.ids)
      if (id == '\n' || (id >= 32 && id <= 126)) text.push_back(static_cast<char>(id));
    return DocDecode{text, g.stop_reason};
  };
}

std::vector<EvalBucket> default_ratio_buckets() {
  using M = ResolutionMode;
  return {{M::Tiny, 128}, {M::Tiny, 192}, {M::Tiny, 256},  {M::Tiny, 384},
          {M::Tiny, 512}, {M::Tiny, 640}, {M::Tiny, 768},  {M::Tiny, 896},
          {M::Tiny, 1004}, {M::Small, 250}, {M::Small, 500}, {M::Small, 800}};
}

std::vector<EvalBucket> default_mode_sweep() {
  using M = ResolutionMode;
  std::vector<EvalBucket> out;
  for (M m : {M::Tiny, M::Small, M::Base})
    for (int n : {220, 480, 760}) out.push_back({m, n});
  return out;
}

StudyResult run_compression_study(const StudyConfig& cfg, const DocDecoder& decode) {
  check(!cfg.buckets.empty() && cfg.docs_per_bucket >= 1, "study: empty configuration");
  StudyResult res;
  for (size_t b = 0; b < cfg.buckets.size(); ++b) {
    const EvalBucket& bucket = cfg.buckets[b];
    BucketSummary sum;
    sum.bucket = static_cast<int>(b);
    sum.mode = bucket.mode;
    sum.n_tokens = bucket.n_tokens;
    sum.n_docs = cfg.docs_per_bucket;
    sum.precision_min = 1.0;
    for (int d = 0; d < cfg.docs_per_bucket; ++d) {
      uint64_t doc_seed =
          hash_combine(hash_combine(hash_u64(cfg.seed), static_cast<uint64_t>(b)),
                       static_cast<uint64_t>(d));
      Sample s = make_sample(doc_seed, bucket.mode, bucket.n_tokens, cfg.vocabulary);
      DocDecode out = decode(s);

      EvalRecord r;
      r.bucket = static_cast<int>(b);
      r.mode = bucket.mode;
      r.doc_seed = doc_seed;
      r.n_text_tokens = static_cast<int>(s.target.size()) - 1;
      r.vision_tokens = s.tiling.total_tokens;
      r.ratio = s.ratio;
      r.precision = decode_precision(s.text, out.text);
      r.token_prec = token_precision(s.text, out.text);
      r.edit_dist = edit_distance(normalize_ws(s.text), normalize_ws(out.text));
      r.pred_len = static_cast<int>(out.text.size());
      r.stop = out.stop;
      res.records.push_back(r);

      sum.ratio += r.ratio;
      sum.precision_mean += r.precision;
      sum.token_prec_mean += r.token_prec;
      sum.precision_min = std::min(sum.precision_min, r.precision);
      sum.precision_max = std::max(sum.precision_max, r.precision);
    }
    sum.ratio /= cfg.docs_per_bucket;
    sum.precision_mean /= cfg.docs_per_bucket;
    sum.token_prec_mean /= cfg.docs_per_bucket;
    res.buckets.push_back(sum);
  }

  if (!cfg.out_dir.empty()) {
    std::string rp = cfg.out_dir + "/records.csv";
    std::ofstream rec(rp, std::ios::trunc);
    check(rec.is_open(), "study: cannot write " + rp);
    rec << "bucket,mode,doc_seed,n_text_tokens,vision_tokens,ratio,precision,"
           "token_precision,edit_distance,pred_len,stop\n";
    for (const EvalRecord& r : res.records) {
      char row[256];
      std::snprintf(row, sizeof(row), "%d,%s,%llu,%d,%lld,%.6f,%.6f,%.6f,%lld,%d,%s\n", r.bucket,
                    to_string(r.mode).c_str(), static_cast<unsigned long long>(r.doc_seed),
                    r.n_text_tokens, static_cast<long long>(r.vision_tokens), r.ratio,
                    r.precision, r.token_prec, static_cast<long long>(r.edit_dist), r.pred_len,
                    stop_name(r.stop));
      rec << row;
    }

    std::string sp = cfg.out_dir + "/summary.csv";
    std::ofstream sumf(sp, std::ios::trunc);
    check(sumf.is_open(), "study: cannot write " + sp);
    sumf << "bucket,mode,n_tokens,n_docs,ratio,precision_mean,precision_min,precision_max,"
            "token_precision_mean\n";
    for (const BucketSummary& s : res.buckets) {
      char row[224];
      std::snprintf(row, sizeof(row), "%d,%s,%d,%d,%.6f,%.6f,%.6f,%.6f,%.6f\n", s.bucket,
                    to_string(s.mode).c_str(), s.n_tokens, s.n_docs, s.ratio, s.precision_mean,
                    s.precision_min, s.precision_max, s.token_prec_mean);
      sumf << row;
    }

    if (cfg.dump_worst > 0) {
      std::vector<size_t> order(res.records.size());
      for (size_t i = 0; i < order.size(); ++i) order[i] = i;
      std::stable_sort(order.begin(), order.end(), [&](size_t x, size_t y) {
        return res.records[x].precision < res.records[y].precision;
      });
      int k = std::min<int>(cfg.dump_worst, static_cast<int>(order.size()));
      for (int i = 0; i < k; ++i) {
        const EvalRecord& r = res.records[order[static_cast<size_t>(i)]];
        Sample full = make_sample(r.doc_seed, r.mode,
                                  cfg.buckets[static_cast<size_t>(r.bucket)].n_tokens,
                                  cfg.vocabulary);
        std::string stem = cfg.out_dir + "/worst" + std::to_string(i) + "_bucket" +
                           std::to_string(r.bucket);
        write_pgm(stem + ".pgm", full.views.front());
        DocDecode redo = decode(full);
        std::ofstream txt(stem + ".txt", std::ios::trunc);
        txt << "precision " << r.precision << "\nratio " << r.ratio << "\n--- ground truth\n"
            << full.text << "\n--- prediction\n"
            << redo.text << "\n";
      }
    }
  }
  return res;
}

}  // namespace occ
