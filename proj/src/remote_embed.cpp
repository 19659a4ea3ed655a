#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "chunkbench/embedding.hpp"
#include "chunkbench/error.hpp"

namespace chunkbench::embedding {

namespace {

using nlohmann::json;

httplib::Client make_client(const ProviderConfig& cfg) {
  httplib::Client client(cfg.endpoint);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(cfg.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(cfg.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  return client;
}

// Sends one request with retries on transport failure and 5xx. Returns the
// parsed body of a 2xx reply.
template <typename Send>
json call_with_retries(const ProviderConfig& cfg, const std::string& what, Send&& send) {
  const int attempts = 1 + cfg.retries;
  std::string last_error;
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    if (attempt > 1) {
      std::this_thread::sleep_for(cfg.retry_backoff * (attempt - 1));
    }
    httplib::Result res = send();
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw ProviderError(what + " rejected with HTTP " + std::to_string(res->status) + ": " + res->body);
    }
    try {
      return json::parse(res->body);
    } catch (const json::parse_error& e) {
      throw ProviderError(what + " returned invalid JSON: " + e.what());
    }
  }
  throw ProviderError(what + " failed after " + std::to_string(attempts) + " attempt" +
                      (attempts == 1 ? "" : "s") + " (" + last_error + ")");
}

}  // namespace

std::vector<EmbeddingVector> embed_remote(std::span<const std::string> texts, const ProviderConfig& cfg) {
  cfg.validate();
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  if (texts.empty()) {
    return out;
  }
  auto client = make_client(cfg);

  for (std::size_t begin = 0; begin < texts.size(); begin += cfg.batch_size) {
    const std::size_t end = std::min(begin + cfg.batch_size, texts.size());
    json request;
    request["texts"] = std::vector<std::string>(texts.begin() + static_cast<std::ptrdiff_t>(begin),
                                                texts.begin() + static_cast<std::ptrdiff_t>(end));
    request["normalize"] = cfg.normalize;
    const std::string body = request.dump();

    json reply = call_with_retries(cfg, "POST " + cfg.endpoint + "/v1/embed",
                                   [&] { return client.Post("/v1/embed", body, "application/json"); });

    std::size_t dim = 0;
    json vectors;
    try {
      dim = reply.at("dim").get<std::size_t>();
      vectors = reply.at("vectors");
    } catch (const json::exception& e) {
      throw ProviderError(std::string("embed reply is missing fields: ") + e.what());
    }
    if (dim != cfg.dim) {
      throw DimensionMismatch("embedding service reports dim " + std::to_string(dim) + ", configured dim is " +
                              std::to_string(cfg.dim));
    }
    if (!vectors.is_array() || vectors.size() != end - begin) {
      throw ProviderError("embedding service returned " + std::to_string(vectors.is_array() ? vectors.size() : 0) +
                          " vectors for " + std::to_string(end - begin) + " texts");
    }
    for (const auto& row : vectors) {
      std::vector<double> values;
      try {
        values = row.get<std::vector<double>>();
      } catch (const json::exception& e) {
        throw ProviderError(std::string("malformed vector in embed reply: ") + e.what());
      }
      if (values.size() != dim) {
        throw DimensionMismatch("embedding row has " + std::to_string(values.size()) + " entries, expected " +
                                std::to_string(dim));
      }
      EmbeddingVector vec(std::move(values));
      out.push_back(cfg.normalize ? vec.normalized() : std::move(vec));
    }
  }
  return out;
}

HealthStatus remote_health(const ProviderConfig& cfg) {
  cfg.validate();
  auto client = make_client(cfg);
  json reply = call_with_retries(cfg, "GET " + cfg.endpoint + "/healthz", [&] { return client.Get("/healthz"); });
  HealthStatus status;
  try {
    status.status = reply.at("status").get<std::string>();
    status.dim = reply.at("dim").get<std::size_t>();
  } catch (const json::exception& e) {
    throw ProviderError(std::string("health reply is missing fields: ") + e.what());
  }
  return status;
}

}  // namespace chunkbench::embedding
