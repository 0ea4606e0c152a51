#pragma once

// HTTP client for the generator wire protocol, plus an in-process
// procedural service speaking the same protocol (used by tests and the
// `serve-mock` CLI command).

#include "httplib.h"

#include <chrono>
#include <memory>
#include <string>
#include <thread>

#include "meshtex/generator.hpp"
#include "meshtex/wire.hpp"

namespace meshtex {

struct Endpoint {
    std::string origin;  ///< scheme://host[:port]
    std::string base;    ///< path prefix without trailing slash, may be empty

    static Endpoint parse(const std::string& url) {
        const auto scheme = url.find("://");
        if (scheme == std::string::npos || scheme == 0) throw InvalidRequestError("endpoint must be an http URL: " + url);
        const auto slash = url.find('/', scheme + 3);
        Endpoint ep{url.substr(0, slash), slash == std::string::npos ? "" : url.substr(slash)};
        while (!ep.base.empty() && ep.base.back() == '/') ep.base.pop_back();
        if (ep.origin.size() <= scheme + 3) throw InvalidRequestError("endpoint has no host: " + url);
        return ep;
    }
};

namespace detail {

inline wire::Json post_json(const std::string& url, const std::string& path, const wire::Json& body, double timeout_s) {
    const Endpoint ep = Endpoint::parse(url);
    httplib::Client cli(ep.origin);
    const auto usec = std::chrono::microseconds(static_cast<long long>(timeout_s * 1e6));
    cli.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(usec).count(), usec.count() % 1000000);
    cli.set_read_timeout(std::chrono::duration_cast<std::chrono::seconds>(usec).count(), usec.count() % 1000000);
    cli.set_write_timeout(std::chrono::duration_cast<std::chrono::seconds>(usec).count(), usec.count() % 1000000);
    const auto res = cli.Post(ep.base + path, body.dump(), "application/json");
    if (!res) throw TransportError(url + path + ": " + httplib::to_string(res.error()));
    if (res->status < 200 || res->status >= 300) {
        std::string message = res->body;
        const auto parsed = wire::Json::parse(res->body, nullptr, false);
        if (!parsed.is_discarded() && parsed.is_object()) {
            if (const auto it = parsed.find("error"); it != parsed.end() && it->is_string()) message = it->get<std::string>();
            else if (const auto d = parsed.find("detail"); d != parsed.end() && d->is_string()) message = d->get<std::string>();
        }
        throw BackendError(res->status, message);
    }
    auto parsed = wire::Json::parse(res->body, nullptr, false);
    if (parsed.is_discarded()) throw SchemaError("response body is not JSON");
    return parsed;
}

}  // namespace detail

inline constexpr double kDefaultTimeoutSeconds = 600.0;

/// POSTs the request to <endpoint>/generate.
inline GeneratorResponse remote_generate(const std::string& endpoint, const GeneratorRequest& req,
                                         double timeout_s = kDefaultTimeoutSeconds) {
    validate(req);
    const auto j = detail::post_json(endpoint, "/generate", wire::encode_generate_request(req), timeout_s);
    return wire::decode_generate_response(j, req.width, req.height);
}

/// POSTs an image-inversion job to <endpoint>/invert and returns the concept id.
inline std::string remote_invert(const std::string& endpoint, const RgbImage& reference, int steps, std::int64_t seed,
                                 double timeout_s = kDefaultTimeoutSeconds) {
    if (steps < 1) throw InvalidRequestError("inversion needs steps >= 1");
    if (reference.empty()) throw InvalidRequestError("inversion needs a reference image");
    const auto j = detail::post_json(endpoint, "/invert", wire::encode_invert_request({reference, steps, seed}), timeout_s);
    return wire::decode_invert_response(j);
}

class RemoteGenerator final : public Generator {
public:
    explicit RemoteGenerator(std::string endpoint, double timeout_s = kDefaultTimeoutSeconds)
        : endpoint_(std::move(endpoint)), timeout_s_(timeout_s) {}

    GeneratorResponse generate(const GeneratorRequest& req, const ViewSpec&) override {
        return remote_generate(endpoint_, req, timeout_s_);
    }

private:
    std::string endpoint_;
    double timeout_s_;
};

/// FNV-1a over the raw RGB bytes, as 16 lowercase hex digits.
inline std::string image_hash_hex(const RgbImage& img) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (std::uint8_t b : img.data()) {
        h ^= b;
        h *= 0x100000001b3ull;
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i, h >>= 4) out[i] = kHex[h & 0xf];
    return out;
}

/// Registers /health, /generate and /invert on `server`, answering in
/// procedural mode: /generate runs mock_generate, /invert returns
/// "stub-<image hash>".
inline void install_procedural_service(httplib::Server& server) {
    const auto reply = [](httplib::Response& res, int status, const wire::Json& body) {
        res.status = status;
        res.set_content(body.dump(), "application/json");
    };
    server.Get("/health", [reply](const httplib::Request&, httplib::Response& res) {
        reply(res, 200, wire::Json{{"status", "ok"}, {"backend", "procedural"}});
    });
    server.Post("/generate", [reply](const httplib::Request& rq, httplib::Response& res) {
        try {
            const auto req = wire::decode_generate_request(wire::Json::parse(rq.body));
            auto resp = mock_generate(req);
            resp.backend = "procedural";
            reply(res, 200, wire::encode_generate_response(resp));
        } catch (const std::exception& e) {
            reply(res, 400, wire::Json{{"error", e.what()}});
        }
    });
    server.Post("/invert", [reply](const httplib::Request& rq, httplib::Response& res) {
        try {
            const auto job = wire::decode_invert_request(wire::Json::parse(rq.body));
            if (job.steps < 1) throw InvalidRequestError("steps must be >= 1");
            reply(res, 200, wire::Json{{"concept_id", "stub-" + image_hash_hex(job.image)}});
        } catch (const std::exception& e) {
            reply(res, 400, wire::Json{{"error", e.what()}});
        }
    });
}

/// httplib server running on a background thread for the object's lifetime.
class BackgroundServer {
public:
    BackgroundServer() : server_(std::make_unique<httplib::Server>()) {}
    ~BackgroundServer() { stop(); }
    BackgroundServer(const BackgroundServer&) = delete;
    BackgroundServer& operator=(const BackgroundServer&) = delete;

    httplib::Server& server() { return *server_; }

    /// Binds to an ephemeral port on 127.0.0.1 and starts serving.
    int start() {
        port_ = server_->bind_to_any_port("127.0.0.1");
        if (port_ <= 0) throw IoError("cannot bind a local port");
        thread_ = std::thread([this] { server_->listen_after_bind(); });
        server_->wait_until_ready();
        return port_;
    }

    void stop() {
        if (thread_.joinable()) {
            server_->stop();
            thread_.join();
        }
    }

    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

private:
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
    int port_ = 0;
};

}  // namespace meshtex
