#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "dataset.hpp"
#include "error.hpp"
#include "links.hpp"
#include "model.hpp"
#include "prediction.hpp"
#include "sampler.hpp"

namespace bayesbin {

enum class OutputFormat { Text, Json, Both };

inline std::string_view to_string(OutputFormat f) {
  switch (f) {
    case OutputFormat::Text: return "text";
    case OutputFormat::Json: return "json";
    case OutputFormat::Both: return "both";
  }
  return "both";
}

inline OutputFormat parse_format(std::string_view s) {
  if (s == "text") return OutputFormat::Text;
  if (s == "json") return OutputFormat::Json;
  if (s == "both") return OutputFormat::Both;
  throw Error(ErrorCode::InvalidArgument, "format must be one of text, json, both");
}

inline bool wants_text(OutputFormat f) { return f != OutputFormat::Json; }
inline bool wants_json(OutputFormat f) { return f != OutputFormat::Text; }

/// Everything a fit depends on. Thread count is deliberately absent: it
/// never changes results.
struct RunConfig {
  std::string data;
  char delimiter = ';';
  std::size_t subsample = 10000;  // 0 = all rows
  BalanceOrder balance = BalanceOrder::After;
  std::size_t holdout = 3;        // rows set aside for predict
  LinkKind link = LinkKind::Logit;
  std::optional<PriorSpec> prior;  // unset = the link's default priors
  SamplerConfig sampler;
  bool standardize = true;
  std::string out = "run";
  OutputFormat format = OutputFormat::Both;
  PredictScale scale = PredictScale::Outcome;

  PriorSpec effective_prior() const { return prior ? *prior : default_priors(link); }

  void validate() const {
    if (data.empty()) throw Error(ErrorCode::InvalidArgument, "config needs a data path");
    if (delimiter == '"' || delimiter == '\n' || delimiter == '\r') {
      throw Error(ErrorCode::InvalidArgument, "unusable delimiter");
    }
    if (prior) prior->validate();
    sampler.validate();
  }

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

inline void to_json(nlohmann::json& j, const RunConfig& c) {
  j = {{"data", c.data},
       {"delimiter", std::string(1, c.delimiter)},
       {"subsample", c.subsample},
       {"balance", std::string(to_string(c.balance))},
       {"holdout", c.holdout},
       {"link", std::string(to_string(c.link))},
       {"prior", c.prior ? nlohmann::json(*c.prior) : nlohmann::json(nullptr)},
       {"sampler", c.sampler},
       {"standardize", c.standardize},
       {"out", c.out},
       {"format", std::string(to_string(c.format))},
       {"scale", std::string(to_string(c.scale))}};
}

/// Missing keys keep their defaults.
inline void from_json(const nlohmann::json& j, RunConfig& c) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, "config must be a JSON object");
  static const char* known[] = {"data",     "delimiter", "subsample", "balance", "holdout", "link",
                                "prior",    "sampler",   "standardize", "out",   "format",  "scale"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
      throw Error(ErrorCode::InvalidArgument, "unknown config key '" + key + "'");
    }
  }
  try {
    if (j.contains("data")) j.at("data").get_to(c.data);
    if (j.contains("delimiter")) {
      const auto d = j.at("delimiter").get<std::string>();
      if (d.size() != 1) throw Error(ErrorCode::InvalidArgument, "delimiter must be a single character");
      c.delimiter = d[0];
    }
    if (j.contains("subsample")) j.at("subsample").get_to(c.subsample);
    if (j.contains("balance")) c.balance = parse_balance_order(j.at("balance").get<std::string>());
    if (j.contains("holdout")) j.at("holdout").get_to(c.holdout);
    if (j.contains("link")) c.link = parse_link(j.at("link").get<std::string>());
    if (j.contains("prior") && !j.at("prior").is_null()) c.prior = j.at("prior").get<PriorSpec>();
    if (j.contains("sampler")) {
      // partial sampler blocks are fine too
      nlohmann::json merged = c.sampler;
      merged.update(j.at("sampler"));
      c.sampler = merged.get<SamplerConfig>();
    }
    if (j.contains("standardize")) j.at("standardize").get_to(c.standardize);
    if (j.contains("out")) j.at("out").get_to(c.out);
    if (j.contains("format")) c.format = parse_format(j.at("format").get<std::string>());
    if (j.contains("scale")) c.scale = parse_scale(j.at("scale").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("bad config: ") + e.what());
  }
}

inline RunConfig parse_config(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("config is not valid JSON: ") + e.what());
  }
  return j.get<RunConfig>();
}

inline std::string emit_config(const RunConfig& c) { return nlohmann::json(c).dump(2) + "\n"; }

}  // namespace bayesbin
