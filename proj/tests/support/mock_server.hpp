#pragma once

// In-process HTTP server speaking the scoring wire protocol, backed by the
// mock scorer. Lets the remote client be tested without the Python service.

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>
#include <thread>

#include "httplib.h"
#include "zsc/errors.hpp"
#include "zsc/mock_scorer.hpp"
#include "zsc/wire.hpp"

namespace zsc::testing {

class MockScoreServer {
 public:
  // Requests past `fail_after` get HTTP 503, simulating a backend that dies
  // mid-run.
  explicit MockScoreServer(std::size_t context_length = 4096,
                           std::size_t fail_after = SIZE_MAX)
      : context_length_(context_length), fail_after_(fail_after) {
    server_.Post(wire::kScorePath, [this](const httplib::Request& req,
                                          httplib::Response& res) {
      handle(req, res, /*null_path=*/false);
    });
    server_.Post(wire::kScoreNullPath, [this](const httplib::Request& req,
                                              httplib::Response& res) {
      handle(req, res, /*null_path=*/true);
    });
    server_.Get(wire::kHealthPath,
                [this](const httplib::Request&, httplib::Response& res) {
                  res.set_content(
                      wire::encode_health({"mock", context_length_}).dump(),
                      "application/json");
                });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~MockScoreServer() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  MockScoreServer(const MockScoreServer&) = delete;
  MockScoreServer& operator=(const MockScoreServer&) = delete;

  std::string endpoint() const {
    return "http://127.0.0.1:" + std::to_string(port_);
  }
  std::size_t requests() const { return requests_.load(); }

 private:
  void handle(const httplib::Request& req, httplib::Response& res,
              bool null_path) {
    if (++requests_ > fail_after_) {
      res.status = 503;
      res.set_content(wire::encode_error("unavailable", "shutting down").dump(),
                      "application/json");
      return;
    }
    try {
      const ScoreQuery q =
          wire::decode_request(nlohmann::json::parse(req.body), null_path);
      if (q.prefix.size() + q.continuation.size() > context_length_) {
        res.status = 422;
        res.set_content(wire::encode_error("over-length", "exceeds context")
                            .dump(),
                        "application/json");
        return;
      }
      const ScoreRecord r = mock_.score(q);
      res.set_content(wire::encode_response(r).dump(), "application/json");
    } catch (const ScorerError& e) {
      res.status = 422;
      res.set_content(wire::encode_error("rejected", e.what()).dump(),
                      "application/json");
    } catch (const std::exception& e) {
      res.status = 400;
      res.set_content(wire::encode_error("bad request", e.what()).dump(),
                      "application/json");
    }
  }

  httplib::Server server_;
  MockScorer mock_;
  std::size_t context_length_;
  std::size_t fail_after_;
  int port_ = 0;
  std::thread thread_;
  std::atomic<std::size_t> requests_{0};
};

}  // namespace zsc::testing
