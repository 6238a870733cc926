#pragma once

#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "csp/orchestrator.hpp"

namespace csp {

// A local duplex byte stream to one external agent process.
class ByteStream {
 public:
  virtual ~ByteStream() = default;
  // Reads exactly n bytes; false on timeout or stream end.
  virtual bool read_exact(void* buf, size_t n, int timeout_ms) = 0;
  virtual bool write_all(const void* buf, size_t n) = 0;
};

// POSIX fd pair (pipes, FIFOs, socketpairs); poll()-based read timeouts.
class FdStream final : public ByteStream {
 public:
  FdStream(int read_fd, int write_fd, bool owns = false);
  ~FdStream() override;
  bool read_exact(void* buf, size_t n, int timeout_ms) override;
  bool write_all(const void* buf, size_t n) override;

 private:
  int read_fd_;
  int write_fd_;
  bool owns_;
};

// In-memory stream: writes are captured, reads are served from queued
// scripted payloads. An empty queue behaves as a timeout.
class MemoryStream final : public ByteStream {
 public:
  bool read_exact(void* buf, size_t n, int timeout_ms) override;
  bool write_all(const void* buf, size_t n) override;

  void queue_input(std::string_view bytes);
  std::string& written() { return written_; }

 private:
  std::string input_;
  size_t input_pos_ = 0;
  std::string written_;
};

// framing: 4-byte big-endian length prefix, then UTF-8 payload
bool write_frame(ByteStream&, std::string_view payload);
std::optional<std::string> read_frame(ByteStream&, int timeout_ms);

// The rendered context message: QUESTION, evidence lines tagged RETRIEVAL /
// FRIEND'S ANSWER / FRIEND'S HEDGE (ids in parentheses when deanonymized),
// and the question repeated.
std::string render_backend_request(const AgentContext&);

struct BackendReply {
  ParsedAction action;
  bool timed_out = false;
};

// One request/response exchange. Timeouts and malformed responses fall back
// to a flagged HEDGE.
BackendReply external_backend_exchange(ByteStream&, const AgentContext&, int timeout_ms);

// Routes registered agents to their external processes; everyone else is
// served by the inner policy.
class ExternalAgentPolicy final : public AgentPolicy {
 public:
  explicit ExternalAgentPolicy(const AgentPolicy* inner = nullptr, int timeout_ms = 2000)
      : inner_(inner), timeout_ms_(timeout_ms) {}

  void register_agent(const std::string& agent_id, std::shared_ptr<ByteStream> stream);

  ActionChoice choose(const World&, const AgentSpec&, const AgentContext&,
                      Rng&) const override;

 private:
  const AgentPolicy* inner_;
  int timeout_ms_;
  std::map<std::string, std::shared_ptr<ByteStream>> streams_;
};

}  // namespace csp
