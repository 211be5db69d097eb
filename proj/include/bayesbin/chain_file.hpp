#pragma once

// Chain file: one line of JSON metadata, then CSV draws
// (chain, iteration, one column per parameter). Numbers use the shortest
// round-trip representation, so reading a file back reproduces the draws
// bit for bit.

#include <charconv>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "dataset.hpp"
#include "encoding.hpp"
#include "error.hpp"
#include "sampler.hpp"

namespace bayesbin {

inline constexpr std::string_view kChainFormat = "bayesbin-chains/1";

/// Writes `draws`; `extra` fields (link, prior, pipeline, ...) are merged into the header.
inline void write_chain_file(std::ostream& out, const PosteriorDraws& draws, const nlohmann::json& extra = {}) {
  nlohmann::json header = extra.is_object() ? extra : nlohmann::json::object();
  header["format"] = kChainFormat;
  header["param_names"] = draws.param_names;
  header["n_chains"] = draws.n_chains;
  header["n_draws"] = draws.n_draws;
  header["seed"] = draws.seed;
  header["step_size"] = draws.step_size;
  header["accept_rate"] = draws.accept_rate;
  header["divergence_count"] = draws.divergence_count;
  header["divergent_iterations"] = draws.divergent_iterations;
  header["inv_metric"] = draws.inv_metric;
  if (draws.encoding) header["encoding"] = *draws.encoding;
  out << header.dump() << '\n';

  out << "chain,iteration";
  for (const auto& n : draws.param_names) out << ',' << n;
  out << '\n';
  for (std::size_t c = 0; c < draws.n_chains; ++c) {
    for (std::size_t i = 0; i < draws.n_draws; ++i) {
      out << c << ',' << i;
      for (std::size_t p = 0; p < draws.n_params; ++p) out << ',' << detail::format_number(draws(c, i, p));
      out << '\n';
    }
  }
}

struct ChainFile {
  nlohmann::json header;
  PosteriorDraws draws;
};

namespace detail {

[[noreturn]] inline void corrupt(std::size_t offset, const std::string& what) {
  throw Error(ErrorCode::CorruptChainFile, "byte offset " + std::to_string(offset) + ": " + what);
}

inline std::size_t parse_index(std::string_view s, std::size_t offset) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) corrupt(offset, "bad index '" + std::string(s) + "'");
  return v;
}

}  // namespace detail

inline ChainFile read_chain_file(std::string_view text) {
  ChainFile cf;
  std::size_t pos = 0;
  auto next_line = [&](std::size_t& start) -> std::string_view {
    start = pos;
    if (pos >= text.size()) return {};
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) {
      detail::corrupt(pos, "unterminated line");
    }
    auto line = text.substr(pos, nl - pos);
    pos = nl + 1;
    return line;
  };

  std::size_t at = 0;
  auto head = next_line(at);
  try {
    cf.header = nlohmann::json::parse(head);
  } catch (const nlohmann::json::exception& e) {
    detail::corrupt(at, std::string("header is not valid JSON: ") + e.what());
  }
  if (!cf.header.is_object() || cf.header.value("format", "") != kChainFormat) {
    detail::corrupt(at, "not a chain file");
  }

  PosteriorDraws& d = cf.draws;
  try {
    cf.header.at("param_names").get_to(d.param_names);
    cf.header.at("n_chains").get_to(d.n_chains);
    cf.header.at("n_draws").get_to(d.n_draws);
    cf.header.at("seed").get_to(d.seed);
    cf.header.at("step_size").get_to(d.step_size);
    cf.header.at("accept_rate").get_to(d.accept_rate);
    cf.header.at("divergence_count").get_to(d.divergence_count);
    cf.header.at("divergent_iterations").get_to(d.divergent_iterations);
    cf.header.at("inv_metric").get_to(d.inv_metric);
    if (cf.header.contains("encoding")) d.encoding = cf.header.at("encoding").get<EncodingMeta>();
  } catch (const nlohmann::json::exception& e) {
    detail::corrupt(at, std::string("incomplete header: ") + e.what());
  }
  d.n_params = d.param_names.size();

  auto columns = next_line(at);
  std::string expected = "chain,iteration";
  for (const auto& n : d.param_names) expected += "," + n;
  if (columns != expected) detail::corrupt(at, "column header does not match parameter names");

  d.values.reserve(d.n_chains * d.n_draws * d.n_params);
  for (std::size_t c = 0; c < d.n_chains; ++c) {
    for (std::size_t i = 0; i < d.n_draws; ++i) {
      auto line = next_line(at);
      if (at >= text.size()) {
        detail::corrupt(at, "file ends after " + std::to_string(c * d.n_draws + i) + " of " +
                                std::to_string(d.n_chains * d.n_draws) + " draws");
      }
      auto fields = detail::split_record(line, ',');
      if (fields.size() != d.n_params + 2) detail::corrupt(at, "expected " + std::to_string(d.n_params + 2) + " fields");
      if (detail::parse_index(fields[0], at) != c || detail::parse_index(fields[1], at) != i) {
        detail::corrupt(at, "draws out of order; expected chain " + std::to_string(c) + " iteration " +
                                std::to_string(i));
      }
      for (std::size_t p = 0; p < d.n_params; ++p) {
        auto v = detail::parse_number(fields[p + 2]);
        if (!v || !std::isfinite(*v)) detail::corrupt(at, "bad value '" + fields[p + 2] + "'");
        d.values.push_back(*v);
      }
    }
  }
  if (pos != text.size()) detail::corrupt(pos, "unexpected trailing data");
  return cf;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline ChainFile read_chain_file_at(const std::string& path) { return read_chain_file(read_file(path)); }

}  // namespace bayesbin
