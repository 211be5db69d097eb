#pragma once

// The batch workflow behind the command-line tool. Each command reads its
// inputs, writes its artifacts and returns a process exit status; library
// errors propagate as bayesbin::Error and are mapped by the caller.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "chain_file.hpp"
#include "config.hpp"
#include "dataset.hpp"
#include "diagnostics.hpp"
#include "encoding.hpp"
#include "loo.hpp"
#include "model.hpp"
#include "prediction.hpp"
#include "sampler.hpp"

namespace bayesbin {

namespace fs = std::filesystem;

inline constexpr double kRhatWarning = 1.01;

inline RecordTable load_dataset(const std::string& path, char delimiter) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open data file '" + path + "'");
  try {
    return parse_dataset(in, delimiter);
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.message());
  }
}

inline void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error(ErrorCode::Io, "write failed for '" + path.string() + "'");
}

inline std::vector<std::string> parameter_names(const EncodingMeta& meta) {
  std::vector<std::string> names{"Intercept"};
  for (const auto& n : meta.column_names()) names.push_back(n);
  return names;
}

/// Training data exactly as the fit saw it: pipeline rerun from the header
/// settings, then encoded with the stored metadata.
struct TrainingData {
  PipelineResult pipeline;
  Encoded encoded;
};

inline nlohmann::json pipeline_json(const RunConfig& c) {
  return {{"data", c.data},
          {"delimiter", std::string(1, c.delimiter)},
          {"subsample", c.subsample},
          {"balance", std::string(to_string(c.balance))},
          {"holdout", c.holdout},
          {"standardize", c.standardize},
          {"seed", c.sampler.seed}};
}

inline TrainingData prepare_training(const RunConfig& c) {
  const RecordTable full = load_dataset(c.data, c.delimiter);
  TrainingData t;
  t.pipeline = run_pipeline(full, c.subsample, c.balance, c.holdout, c.sampler.seed);
  t.encoded = encode(t.pipeline.train, c.standardize);
  return t;
}

// ---------------------------------------------------------------------------
// summary report, shared by fit and diagnose

struct Report {
  std::vector<ParamSummary> rows;
  std::vector<std::string> warnings;
};

inline Report build_report(const PosteriorDraws& draws) {
  Report r;
  r.rows = summarize(draws);
  if (draws.divergence_flag()) {
    r.warnings.push_back(std::to_string(draws.total_divergences()) + " of " + std::to_string(draws.total_draws()) +
                         " transitions after warmup were divergent");
  }
  for (const auto& row : r.rows) {
    if (row.rhat && *row.rhat > kRhatWarning) {
      std::ostringstream s;
      s << "Rhat for " << row.name << " is " << std::fixed << std::setprecision(3) << *row.rhat << " (> 1.01)";
      r.warnings.push_back(s.str());
    }
  }
  return r;
}

inline std::string report_text(const Report& r, const nlohmann::json& header) {
  std::ostringstream out;
  for (const auto& w : r.warnings) out << "WARNING: " << w << '\n';
  if (header.contains("link")) out << "Link: " << header["link"].get<std::string>() << '\n';
  render_summary(r.rows, out);
  return out.str();
}

inline nlohmann::json report_json(const Report& r, const PosteriorDraws& draws, const nlohmann::json& header) {
  return {{"link", header.value("link", "")},
          {"warnings", r.warnings},
          {"divergences", draws.total_divergences()},
          {"draws", draws.total_draws()},
          {"parameters", summary_json(r.rows)}};
}

inline void emit(std::ostream& out, OutputFormat format, const std::string& text, const nlohmann::json& json) {
  if (wants_text(format)) out << text;
  if (wants_json(format)) out << json.dump(2) << '\n';
}

// ---------------------------------------------------------------------------

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

/// parse, subsample, balance, encode, sample; artifacts go to config.out.
inline int cmd_fit(const RunConfig& config, std::ostream& out, unsigned threads = 0) {
  config.validate();
  TrainingData t = prepare_training(config);
  const ModelSpec model(config.link, config.effective_prior(), t.encoded.design.values, t.encoded.target);
  PosteriorDraws draws = sample(model, config.sampler, parameter_names(t.encoded.design.meta), threads);
  draws.encoding = t.encoded.design.meta;

  const fs::path dir(config.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create output directory '" + dir.string() + "': " + ec.message());

  nlohmann::json header = {{"link", std::string(to_string(config.link))},
                           {"prior", config.effective_prior()},
                           {"sampler", config.sampler},
                           {"fingerprint", dataset_fingerprint(model)},
                           {"pipeline", pipeline_json(config)}};
  std::ostringstream chains;
  write_chain_file(chains, draws, header);
  write_text_file(dir / "draws.chains", chains.str());
  write_text_file(dir / "config.json", emit_config(config));
  write_text_file(dir / "encoding.json", nlohmann::json(t.encoded.design.meta).dump(2) + "\n");
  // artifacts this run does not produce must not survive from an earlier run
  for (const char* stale : {"balance.json", "summary.txt", "summary.json"}) fs::remove(dir / stale, ec);
  if (t.pipeline.balance) write_text_file(dir / "balance.json", nlohmann::json(*t.pipeline.balance).dump(2) + "\n");
  {
    std::ostringstream held;
    write_dataset(t.pipeline.holdout, held, config.delimiter);
    write_text_file(dir / "holdout.csv", held.str());
  }

  const Report report = build_report(draws);
  const std::string text = report_text(report, header);
  const nlohmann::json json = report_json(report, draws, header);
  if (wants_text(config.format)) write_text_file(dir / "summary.txt", text);
  if (wants_json(config.format)) write_text_file(dir / "summary.json", json.dump(2) + "\n");
  {
    std::ofstream log(dir / "run.log", std::ios::app);
    log << utc_timestamp() << " fit " << config.data << " link=" << to_string(config.link)
        << " seed=" << config.sampler.seed << " rows=" << model.rows() << '\n';
  }
  emit(out, config.format, text, json);
  return 0;
}

/// Recomputes the summary from a stored chain file.
inline int cmd_diagnose(const std::string& chain_path, OutputFormat format, std::ostream& out) {
  const ChainFile cf = read_chain_file_at(chain_path);
  const Report report = build_report(cf.draws);
  emit(out, format, report_text(report, cf.header), report_json(report, cf.draws, cf.header));
  return 0;
}

inline RunConfig config_from_header(const nlohmann::json& header, const std::string& data_override) {
  RunConfig c;
  try {
    const auto& p = header.at("pipeline");
    c.data = data_override.empty() ? p.at("data").get<std::string>() : data_override;
    c.delimiter = p.at("delimiter").get<std::string>().at(0);
    c.subsample = p.at("subsample").get<std::size_t>();
    c.balance = parse_balance_order(p.at("balance").get<std::string>());
    c.holdout = p.at("holdout").get<std::size_t>();
    c.standardize = p.at("standardize").get<bool>();
    c.sampler.seed = p.at("seed").get<std::uint64_t>();
    c.link = parse_link(header.at("link").get<std::string>());
    c.prior = header.at("prior").get<PriorSpec>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::CorruptChainFile, std::string("chain file lacks pipeline settings: ") + e.what());
  } catch (const std::out_of_range&) {
    throw Error(ErrorCode::CorruptChainFile, "chain file has an empty delimiter");
  }
  return c;
}

/// PSIS-LOO for each chain file against its reconstructed training data.
/// `data_override` replaces the data path recorded in the headers.
inline int cmd_compare(const std::vector<std::string>& chain_paths, const std::string& data_override,
                       OutputFormat format, std::ostream& out) {
  if (chain_paths.size() < 2) throw Error(ErrorCode::InvalidArgument, "compare needs at least two chain files");
  std::map<std::string, TrainingData> cache;  // keyed by pipeline settings
  std::vector<std::pair<std::string, LooResult>> results;
  nlohmann::json details = nlohmann::json::object();
  for (const auto& path : chain_paths) {
    const ChainFile cf = read_chain_file_at(path);
    const RunConfig c = config_from_header(cf.header, data_override);
    const std::string key = pipeline_json(c).dump();
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, prepare_training(c)).first;
    const TrainingData& t = it->second;
    if (!cf.draws.encoding) throw Error(ErrorCode::CorruptChainFile, path + ": no encoding metadata");
    const DesignMatrix x = apply_encoding(t.pipeline.train, *cf.draws.encoding);
    const ModelSpec model(c.link, *c.prior, x.values, t.encoded.target);
    const auto fp = dataset_fingerprint(model);
    if (fp != cf.header.value("fingerprint", std::uint64_t{0})) {
      throw Error(ErrorCode::DatasetMismatch, path + ": reconstructed training data does not match the fit");
    }
    std::string name = std::string(to_string(c.link));
    for (const auto& [n, _] : results) {
      if (n == name) name = path;
    }
    LooResult loo = psis_loo(cf.draws, model);
    details[name] = loo_json(loo);
    results.emplace_back(name, std::move(loo));
  }
  const LooComparison rows = compare(results);
  std::ostringstream text;
  render_comparison(rows, text);
  for (const auto& [name, r] : results) {
    if (r.n_high_k > 0) {
      text << "WARNING: " << name << " has " << r.n_high_k << " observations with Pareto k > " << kParetoKWarning
           << '\n';
    }
  }
  emit(out, format, text.str(), {{"comparison", comparison_json(rows)}, {"models", details}});
  return 0;
}

/// Posterior predictive table for rows in `data_path`, encoded with the fit's metadata.
inline int cmd_predict(const std::string& chain_path, const std::string& data_path, PredictScale scale,
                       std::optional<char> delimiter, OutputFormat format, std::ostream& out) {
  const ChainFile cf = read_chain_file_at(chain_path);
  if (!cf.draws.encoding) throw Error(ErrorCode::EncodingMismatch, chain_path + ": no encoding metadata");
  char delim = ';';
  if (delimiter) {
    delim = *delimiter;
  } else if (cf.header.contains("pipeline")) {
    delim = cf.header["pipeline"].value("delimiter", std::string(";")).at(0);
  }
  const RecordTable rows = load_dataset(data_path, delim);
  const DesignMatrix x = apply_encoding(rows, *cf.draws.encoding);
  const LinkKind link = parse_link(cf.header.value("link", std::string("logit")));
  const auto preds = posterior_predict(cf.draws, link, x, scale, cf.draws.seed);
  std::ostringstream text;
  render_predictions(preds, text);
  emit(out, format, text.str(), predictions_json(preds));
  return 0;
}

}  // namespace bayesbin
