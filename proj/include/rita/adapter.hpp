#pragma once

// Client side of the line-delimited predictor protocol used to plug trained
// models into the pipeline.
//
//   request:  {"id": "<string>", "text": "<string>"}
//   reply:    {"id": "<string>", "entities": [{"start": int, "end": int, "label": "<CATEGORY>"}]}
//
// One reply per request, in order. Offsets count code points of the request
// text.

#include <atomic>
#include <chrono>
#include <cstddef>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "rita/corpus.hpp"
#include "rita/extraction.hpp"

namespace rita {

struct AdapterConfig {
  enum class Transport {
    /// `locator` is a shell command; the predictor speaks on stdin/stdout.
    Process,
    /// `locator` is host:port. The only network-capable path in the toolkit.
    Tcp,
  };

  Transport transport = Transport::Process;
  std::string locator;
  std::chrono::milliseconds timeout{10000};
  /// Longest accepted request text, in code points.
  std::size_t max_text_length = 1 << 20;
};

struct AdapterReply {
  std::vector<EntitySpan> spans;
  /// Entities rejected for bad bounds, unknown category or overlap.
  std::size_t dropped = 0;
};

std::string make_adapter_request(std::string_view id, std::string_view text);

/// Parses and validates one reply line against the request it answers.
/// Throws AdapterError(MalformedReply) for protocol violations; bad entities
/// are dropped and counted instead.
AdapterReply parse_adapter_reply(std::string_view line, std::string_view expected_id,
                                 std::u32string_view text);

/// One connection to an external predictor. Requests on a connection are
/// serialized; the connection is (re)opened lazily and discarded after a
/// timeout or protocol error.
class ExternalAdapter {
 public:
  /// Throws std::invalid_argument for a non-positive timeout or empty locator.
  explicit ExternalAdapter(AdapterConfig cfg);
  ~ExternalAdapter();

  ExternalAdapter(const ExternalAdapter&) = delete;
  ExternalAdapter& operator=(const ExternalAdapter&) = delete;

  AdapterReply request(std::string_view text);

  const AdapterConfig& config() const { return cfg_; }

 private:
  class Connection;

  AdapterConfig cfg_;
  std::mutex mu_;
  std::unique_ptr<Connection> conn_;
  std::size_t next_id_ = 0;
};

/// One-shot request over a fresh connection.
std::vector<EntitySpan> external_extract(const AdapterConfig& cfg, std::string_view text,
                                         std::size_t* dropped = nullptr);

class AdapterExtractor final : public Extractor {
 public:
  explicit AdapterExtractor(AdapterConfig cfg) : adapter_(std::move(cfg)) {}

  std::vector<EntitySpan> extract(std::string_view text) override;

  /// Total entities dropped across all requests so far.
  std::size_t dropped() const { return dropped_.load(); }

 private:
  ExternalAdapter adapter_;
  std::atomic<std::size_t> dropped_{0};
};

}  // namespace rita
