#include "csp/backend.hpp"

#include <poll.h>
#include <unistd.h>

#include <cstring>
#include <cerrno>

namespace csp {

FdStream::FdStream(int read_fd, int write_fd, bool owns)
    : read_fd_(read_fd), write_fd_(write_fd), owns_(owns) {}

FdStream::~FdStream() {
  if (owns_) {
    if (read_fd_ >= 0) ::close(read_fd_);
    if (write_fd_ >= 0 && write_fd_ != read_fd_) ::close(write_fd_);
  }
}

bool FdStream::read_exact(void* buf, size_t n, int timeout_ms) {
  auto* out = static_cast<char*>(buf);
  size_t total = 0;
  while (total < n) {
    pollfd pfd{read_fd_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, timeout_ms);
    if (ready <= 0) return false;  // timeout or poll error
    const ssize_t got = ::read(read_fd_, out + total, n - total);
    if (got <= 0) {
      if (got < 0 && errno == EINTR) continue;
      return false;  // closed stream
    }
    total += static_cast<size_t>(got);
  }
  return true;
}

bool FdStream::write_all(const void* buf, size_t n) {
  const auto* data = static_cast<const char*>(buf);
  size_t total = 0;
  while (total < n) {
    const ssize_t put = ::write(write_fd_, data + total, n - total);
    if (put <= 0) {
      if (put < 0 && errno == EINTR) continue;
      return false;
    }
    total += static_cast<size_t>(put);
  }
  return true;
}

bool MemoryStream::read_exact(void* buf, size_t n, int timeout_ms) {
  (void)timeout_ms;
  if (input_.size() - input_pos_ < n) return false;  // scripted timeout
  std::memcpy(buf, input_.data() + input_pos_, n);
  input_pos_ += n;
  return true;
}

bool MemoryStream::write_all(const void* buf, size_t n) {
  written_.append(static_cast<const char*>(buf), n);
  return true;
}

void MemoryStream::queue_input(std::string_view bytes) { input_.append(bytes); }

bool write_frame(ByteStream& stream, std::string_view payload) {
  const auto n = static_cast<uint32_t>(payload.size());
  const unsigned char header[4] = {
      static_cast<unsigned char>(n >> 24), static_cast<unsigned char>(n >> 16),
      static_cast<unsigned char>(n >> 8), static_cast<unsigned char>(n)};
  return stream.write_all(header, 4) && stream.write_all(payload.data(), payload.size());
}

std::optional<std::string> read_frame(ByteStream& stream, int timeout_ms) {
  unsigned char header[4];
  if (!stream.read_exact(header, 4, timeout_ms)) return std::nullopt;
  const uint32_t n = (static_cast<uint32_t>(header[0]) << 24) |
                     (static_cast<uint32_t>(header[1]) << 16) |
                     (static_cast<uint32_t>(header[2]) << 8) |
                     static_cast<uint32_t>(header[3]);
  std::string payload(n, '\0');
  if (n > 0 && !stream.read_exact(payload.data(), n, timeout_ms)) return std::nullopt;
  return payload;
}

std::string render_backend_request(const AgentContext& ctx) {
  std::string out = "QUESTION: " + ctx.query + "\n";
  for (const auto& e : ctx.evidence) {
    switch (e.tag) {
      case EvidenceTag::Retrieval: out += "RETRIEVAL"; break;
      case EvidenceTag::FriendAnswer: out += "FRIEND'S ANSWER"; break;
      case EvidenceTag::FriendHedge: out += "FRIEND'S HEDGE"; break;
    }
    if (!e.source_id.empty()) out += " (" + e.source_id + ")";
    out += ": " + e.text + "\n";
  }
  out += "QUESTION: " + ctx.query + "\n";
  return out;
}

BackendReply external_backend_exchange(ByteStream& stream, const AgentContext& ctx,
                                       int timeout_ms) {
  BackendReply reply;
  if (!write_frame(stream, render_backend_request(ctx))) {
    reply.timed_out = true;
    reply.action = {ActionKind::hedge(), "", true};
    return reply;
  }
  const auto response = read_frame(stream, timeout_ms);
  if (!response) {
    reply.timed_out = true;
    reply.action = {ActionKind::hedge(), "", true};
    return reply;
  }
  // strip one trailing newline so line-oriented writers parse cleanly
  std::string_view line = *response;
  if (!line.empty() && line.back() == '\n') line.remove_suffix(1);
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  reply.action = parse_action_line(line);
  return reply;
}

void ExternalAgentPolicy::register_agent(const std::string& agent_id,
                                         std::shared_ptr<ByteStream> stream) {
  streams_[agent_id] = std::move(stream);
}

ActionChoice ExternalAgentPolicy::choose(const World& world, const AgentSpec& agent,
                                         const AgentContext& ctx, Rng& rng) const {
  const auto it = streams_.find(agent.agent_id);
  if (it == streams_.end()) {
    if (inner_ != nullptr) return inner_->choose(world, agent, ctx, rng);
    return {ActionKind::hedge(), "", ArgSource::Verbatim, "", true};
  }
  const BackendReply reply = external_backend_exchange(*it->second, ctx, timeout_ms_);
  ActionChoice choice;
  choice.kind = reply.action.kind;
  choice.argument = reply.action.argument;
  choice.source = ArgSource::Verbatim;
  choice.violation = reply.action.violation;
  return choice;
}

}  // namespace csp
