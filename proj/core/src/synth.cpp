#include "tvgnn/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "tvgnn/errors.hpp"
#include "tvgnn/rng.hpp"

namespace tvgnn::data {

void SynthConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError("synthetic config: " + msg); };
  if (num_companies < 2) fail("num_companies must be at least 2");
  if (num_quarters < 1) fail("num_quarters must be at least 1");
  if (start_quarter < 1 || start_quarter > 4) fail("start_quarter must be 1..4");
  if (sentence_dim < 1) fail("sentence_dim must be positive");
  if (min_sentences < 1 || min_sentences > max_sentences) fail("need 1 <= min_sentences <= max_sentences");
  if (!(relation_density >= 0.0 && relation_density <= 1.0)) fail("relation_density must lie in [0,1]");
  if (!(relation_persistence >= 0.0 && relation_persistence <= 1.0)) fail("relation_persistence must lie in [0,1]");
  if (!(signal_strength >= 0.0)) fail("signal_strength must be non-negative");
  if (!(noise_sd >= 0.0) || !(regime_sd >= 0.0)) fail("noise_sd and regime_sd must be non-negative");
  if (!(base_vol > 0.0) || base_vol > 0.2) fail("base_vol must lie in (0, 0.2]");
  if (!(return_jitter >= 0.0) || return_jitter > 0.5) fail("return_jitter must lie in [0, 0.5]");
  if (event_days < 1) fail("event_days must be positive");
  if (call_window_start < 0 || call_window_end > 88 || call_window_start > call_window_end) {
    fail("call window must satisfy 0 <= start <= end <= 88");
  }
  if (!(threshold >= 0.0 && threshold < 1.0)) fail("threshold must lie in [0,1)");
}

namespace {

const std::array<const char*, 24> kVocabulary = {
    "revenue", "growth",   "margin",  "guidance", "quarter", "demand",   "pricing",    "customers",
    "cloud",   "segment",  "outlook", "expect",   "cost",    "inflation", "strong",    "weak",
    "capital", "dividend", "pipeline", "backlog",  "supply",  "risk",     "investment", "market"};

std::vector<double> random_unit(std::size_t dim, Rng& rng) {
  std::vector<double> u(dim);
  double norm = 0.0;
  for (auto& x : u) {
    x = rng.normal();
    norm += x * x;
  }
  norm = std::sqrt(norm);
  for (auto& x : u) x /= norm;
  return u;
}

std::string company_name(std::size_t i) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "C%04zu", i);
  return buf;
}

}  // namespace

SynthDataset gen_synthetic(const SynthConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng(seed);
  SynthDataset out;
  const std::size_t C = cfg.num_companies;

  std::vector<std::string> companies(C);
  for (std::size_t i = 0; i < C; ++i) companies[i] = company_name(i);

  std::vector<Quarter> quarters;
  Quarter q{cfg.start_year, cfg.start_quarter};
  for (std::size_t k = 0; k < cfg.num_quarters; ++k, q = q.next()) quarters.push_back(q);

  const std::vector<double> tone_dir = random_unit(cfg.sentence_dim, rng);

  // Relations: a persistent base pair set, listed per year with some churn.
  struct BasePair {
    std::size_t a, b;
    double sim;
  };
  std::vector<BasePair> base;
  for (std::size_t a = 0; a < C; ++a)
    for (std::size_t b = a + 1; b < C; ++b)
      if (rng.bernoulli(cfg.relation_density)) base.push_back({a, b, rng.uniform(0.05, 1.0)});

  std::map<int, std::vector<std::vector<double>>> sim_by_year;  // year -> C x C similarity
  for (int year = quarters.front().year - 1; year <= quarters.back().year - 1; ++year) {
    auto& sim = sim_by_year[year];
    sim.assign(C, std::vector<double>(C, 0.0));
    for (const auto& p : base) {
      if (!rng.bernoulli(cfg.relation_persistence)) continue;
      const double s = std::clamp(p.sim + rng.normal(0.0, 0.05), 0.0, 1.0);
      sim[p.a][p.b] = sim[p.b][p.a] = s;
      out.relations.push_back({companies[p.a], companies[p.b], year, s});
    }
  }

  // Calls and latent factors.
  struct CallLatent {
    std::size_t company;
    Date date;
    double log_mult;
  };
  std::vector<CallLatent> call_latent;
  for (const auto& quarter : quarters) {
    const double regime = rng.normal(0.0, cfg.regime_sd);
    std::vector<Date> dates(C);
    std::vector<double> tone(C), shock(C);
    for (std::size_t c = 0; c < C; ++c) {
      Date d;
      do {
        const auto offset = static_cast<long>(
            rng.below(static_cast<std::uint64_t>(cfg.call_window_end - cfg.call_window_start + 1)));
        d = quarter.first_day() + std::chrono::days{cfg.call_window_start + offset};
      } while (!is_weekday(d));
      dates[c] = d;
      tone[c] = rng.normal();
      shock[c] = rng.normal(0.0, cfg.noise_sd);
    }
    const auto& sim = sim_by_year.at(quarter.year - 1);
    for (std::size_t c = 0; c < C; ++c) {
      double acc = 0.0;
      std::size_t n = 0;
      for (std::size_t j = 0; j < C; ++j) {
        if (j == c || !(sim[c][j] > cfg.threshold) || dates[j] > dates[c]) continue;
        acc += tone[j];
        ++n;
      }
      const double zbar = n ? acc / static_cast<double>(n) : 0.0;
      const double log_mult =
          cfg.signal_strength * (tone[c] + cfg.neighbor_weight * zbar + regime) + shock[c];

      CallRecord call;
      call.company_id = companies[c];
      call.call_id = companies[c] + "-" + quarter.str();
      call.call_date = dates[c];
      const auto n_sent = cfg.min_sentences + rng.below(cfg.max_sentences - cfg.min_sentences + 1);
      const auto n_pres = std::max<std::size_t>(1, n_sent * 2 / 5);
      std::size_t utterance = 0, left_in_utt = 1 + rng.below(3);
      Role role = Role::Executive;
      for (std::size_t j = 0; j < n_sent; ++j) {
        const Part part = j < n_pres ? Part::Presentation : Part::QA;
        if (j == n_pres) {
          // Q&A opens with an analyst question.
          ++utterance;
          role = Role::Analyst;
          left_in_utt = 1 + rng.below(2);
        } else if (left_in_utt == 0) {
          ++utterance;
          if (part == Part::QA) role = role == Role::Analyst ? Role::Executive : Role::Analyst;
          left_in_utt = 1 + rng.below(3);
        }
        --left_in_utt;
        Sentence s;
        s.position = j;
        s.utterance_idx = utterance;
        s.role = role;
        s.part = part;
        std::vector<double> v(cfg.sentence_dim);
        const double scale = cfg.sentence_noise / std::sqrt(static_cast<double>(cfg.sentence_dim));
        for (std::size_t k = 0; k < v.size(); ++k) {
          v[k] = scale * rng.normal();
          if (role == Role::Executive) v[k] += cfg.tone_amplitude * tone[c] * tone_dir[k];
        }
        s.vector = std::move(v);
        if (cfg.emit_text) {
          std::string text;
          const auto words = 5 + rng.below(8);
          for (std::size_t w = 0; w < words; ++w) {
            if (w) text.push_back(' ');
            text += kVocabulary[rng.below(kVocabulary.size())];
          }
          s.text = std::move(text);
        }
        call.sentences.push_back(std::move(s));
      }
      out.latent.push_back({call.call_id, call.company_id, call.call_date, tone[c], zbar, regime, shock[c], log_mult});
      call_latent.push_back({c, dates[c], log_mult});
      out.transcripts.push_back(std::move(call));
    }
  }

  // Prices on weekdays with margins for the trailing and forward windows.
  std::vector<Date> days;
  const Date first = quarters.front().first_day() - std::chrono::days{70};
  const Date last = quarters.back().last_day() + std::chrono::days{45};
  for (Date d = first; d <= last; d += std::chrono::days{1})
    if (is_weekday(d)) days.push_back(d);

  std::vector<std::vector<double>> mult(C, std::vector<double>(days.size(), 1.0));
  for (const auto& cl : call_latent) {
    const auto t = static_cast<std::size_t>(std::lower_bound(days.begin(), days.end(), cl.date) - days.begin());
    for (std::size_t d = t + 1; d <= t + cfg.event_days && d < days.size(); ++d) {
      mult[cl.company][d] = std::exp(cl.log_mult);
    }
  }
  for (std::size_t c = 0; c < C; ++c) {
    PriceSeries s;
    s.company_id = companies[c];
    s.dates = days;
    s.adjusted_close.resize(days.size());
    double p = 100.0 * std::exp(rng.uniform(-0.7, 0.7));
    s.adjusted_close[0] = p;
    for (std::size_t d = 1; d < days.size(); ++d) {
      const double sign = d % 2 == 0 ? 1.0 : -1.0;
      const double magnitude = cfg.base_vol * mult[c][d] * std::max(0.0, 1.0 + cfg.return_jitter * rng.normal());
      p *= 1.0 + std::clamp(sign * magnitude, -0.9, 0.9);
      s.adjusted_close[d] = p;
    }
    out.prices.push_back(std::move(s));
  }
  return out;
}

void write_synthetic(const std::filesystem::path& dir, const SynthDataset& data) {
  std::filesystem::create_directories(dir);
  write_transcripts(dir / "transcripts.jsonl", data.transcripts);
  write_prices(dir / "prices.csv", data.prices);
  write_relations(dir / "relations.csv", data.relations);
  std::ofstream out(dir / "latent.csv");
  if (!out) throw DataError("cannot write " + (dir / "latent.csv").string());
  out << "call_id,company_id,date,tone,neighbor_tone,regime,shock,log_multiplier\n";
  for (const auto& l : data.latent) {
    out << l.call_id << ',' << l.company_id << ',' << format_date(l.call_date) << ',' << format_real(l.tone)
        << ',' << format_real(l.neighbor_tone) << ',' << format_real(l.regime) << ',' << format_real(l.shock)
        << ',' << format_real(l.log_multiplier) << '\n';
  }
}

}  // namespace tvgnn::data
