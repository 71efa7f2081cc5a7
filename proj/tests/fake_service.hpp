// In-process stand-in for the embedding / translation services.
#pragma once

#include <atomic>
#include <functional>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

class FakeService {
public:
    using Handler = std::function<void(const nlohmann::json& request, httplib::Response& res)>;

    FakeService() {
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~FakeService() {
        server_.stop();
        thread_.join();
    }

    void on(const std::string& path, Handler handler) {
        server_.Post(path, [this, handler](const httplib::Request& req, httplib::Response& res) {
            ++requests;
            last_body = req.body;
            handler(nlohmann::json::parse(req.body), res);
        });
    }

    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

    std::atomic<int> requests{0};
    std::string last_body;

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

inline void reply_json(httplib::Response& res, const nlohmann::json& body, int status = 200) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}
