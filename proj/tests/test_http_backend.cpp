#include <atomic>
#include <fstream>
#include <thread>

#include <doctest.h>
#include <httplib.h>
#include <json.hpp>

#include "cocotree/http_backend.hpp"
#include "cocotree/model_ops.hpp"
#include "cocotree/wire.hpp"
#include "support.hpp"

using namespace cocotree;
using nlohmann::json;

namespace {

// Runs an in-process chat-completions endpoint for one test.
class TestServer {
public:
    explicit TestServer(httplib::Server::Handler handler) {
        server_.Post("/v1/chat/completions", std::move(handler));
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }

    ~TestServer() {
        server_.stop();
        thread_.join();
    }

    EndpointConfig endpoint() const {
        EndpointConfig config;
        config.base_url = "http://127.0.0.1:" + std::to_string(port_) + "/v1";
        config.model_id = "test-model";
        config.timeout_seconds = 5.0;
        config.max_retries = 2;
        return config;
    }

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

ModelRequest generate_request(const std::string& prompt) {
    ModelRequest request;
    request.kind = ModelRequest::Kind::generate;
    request.prompt = prompt;
    return request;
}

ModelRequest yes_no_req(const std::string& prompt) {
    ModelRequest request;
    request.kind = ModelRequest::Kind::yes_no;
    request.prompt = prompt;
    request.max_tokens = 1;
    return request;
}

}  // namespace

TEST_CASE("completion request carries model, temperature zero, and the prompt") {
    json seen;
    TestServer server([&](const httplib::Request& req, httplib::Response& res) {
        seen = json::parse(req.body);
        res.set_content(wire::make_completion_body("1. a cat 2. a mat"), "application/json");
    });
    HttpBackend backend(server.endpoint(), 0.01);
    std::string body = backend.complete(generate_request("split this caption"));
    CHECK(wire::extract_completion(body) == "1. a cat 2. a mat");
    CHECK(seen["model"] == "test-model");
    CHECK(seen["temperature"] == 0);
    CHECK_FALSE(seen.contains("logprobs"));
    CHECK(seen["messages"][0]["content"] == "split this caption");
}

TEST_CASE("yes/no request asks for logprobs and a single token") {
    json seen;
    TestServer server([&](const httplib::Request& req, httplib::Response& res) {
        seen = json::parse(req.body);
        res.set_content(wire::make_yes_no_body(1.0, -1.0), "application/json");
    });
    HttpBackend backend(server.endpoint(), 0.01);
    std::string body = backend.complete(yes_no_req("Is it a cat? Answer yes or no."));
    wire::YesNoExtraction got = wire::extract_yes_no(body);
    REQUIRE(got.logits.has_value());
    CHECK(seen["logprobs"] == true);
    CHECK(seen["top_logprobs"] == 20);
    CHECK(seen["max_tokens"] == 1);
}

TEST_CASE("bearer token is attached when configured") {
    std::string auth;
    TestServer server([&](const httplib::Request& req, httplib::Response& res) {
        auth = req.get_header_value("Authorization");
        res.set_content(wire::make_completion_body("ok"), "application/json");
    });
    EndpointConfig config = server.endpoint();
    config.api_key = "sk-test-123";
    HttpBackend backend(config, 0.01);
    backend.complete(generate_request("x"));
    CHECK(auth == "Bearer sk-test-123");
}

TEST_CASE("local images travel as data URIs, urls pass through") {
    json seen;
    TestServer server([&](const httplib::Request& req, httplib::Response& res) {
        seen = json::parse(req.body);
        res.set_content(wire::make_yes_no_body(0.5, -0.5), "application/json");
    });
    HttpBackend backend(server.endpoint(), 0.01);

    SUBCASE("file reference") {
        testsupport::TempDir dir("img");
        std::filesystem::path file = dir.path() / "tiny.png";
        std::ofstream(file, std::ios::binary) << "PNGDATA";
        ModelRequest request = yes_no_req("Does this figure show: a cat?");
        request.image = file.string();
        backend.complete(request);
        const json& content = seen["messages"][0]["content"];
        REQUIRE(content.is_array());
        CHECK(content[0]["type"] == "image_url");
        std::string url = content[0]["image_url"]["url"];
        CHECK(url.rfind("data:image/png;base64,", 0) == 0);
        CHECK(content[1]["type"] == "text");
    }
    SUBCASE("url reference") {
        ModelRequest request = yes_no_req("Does this figure show: a cat?");
        request.image = "https://img.example/cat.png";
        backend.complete(request);
        CHECK(seen["messages"][0]["content"][0]["image_url"]["url"] ==
              "https://img.example/cat.png");
    }
}

TEST_CASE("transient failures are retried, permanent ones are not") {
    SUBCASE("5xx then success") {
        std::atomic<int> calls{0};
        TestServer server([&](const httplib::Request&, httplib::Response& res) {
            if (calls.fetch_add(1) < 2) {
                res.status = 503;
                return;
            }
            res.set_content(wire::make_completion_body("recovered"), "application/json");
        });
        HttpBackend backend(server.endpoint(), 0.01);
        CHECK(wire::extract_completion(backend.complete(generate_request("x"))) == "recovered");
        CHECK(calls.load() == 3);
    }
    SUBCASE("429 then success") {
        std::atomic<int> calls{0};
        TestServer server([&](const httplib::Request&, httplib::Response& res) {
            if (calls.fetch_add(1) < 1) {
                res.status = 429;
                return;
            }
            res.set_content(wire::make_completion_body("ok"), "application/json");
        });
        HttpBackend backend(server.endpoint(), 0.01);
        backend.complete(generate_request("x"));
        CHECK(calls.load() == 2);
    }
    SUBCASE("retry budget exhausts into backend-unavailable") {
        std::atomic<int> calls{0};
        TestServer server([&](const httplib::Request&, httplib::Response& res) {
            calls.fetch_add(1);
            res.status = 500;
        });
        HttpBackend backend(server.endpoint(), 0.01);
        CHECK_THROWS_AS(backend.complete(generate_request("x")), Error);
        CHECK(calls.load() == 3);
    }
    SUBCASE("4xx fails immediately") {
        std::atomic<int> calls{0};
        TestServer server([&](const httplib::Request&, httplib::Response& res) {
            calls.fetch_add(1);
            res.status = 400;
            res.set_content("{\"error\":\"bad request\"}", "application/json");
        });
        HttpBackend backend(server.endpoint(), 0.01);
        CHECK_THROWS_WITH_AS(backend.complete(generate_request("x")),
                             doctest::Contains("bad request"), Error);
        CHECK(calls.load() == 1);
    }
}

TEST_CASE("unreachable host raises backend-unavailable") {
    EndpointConfig config;
    config.base_url = "http://127.0.0.1:1/v1";
    config.model_id = "m";
    config.timeout_seconds = 1.0;
    config.max_retries = 0;
    HttpBackend backend(config, 0.0);
    try {
        backend.complete(generate_request("x"));
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::backend_unavailable);
    }
}

TEST_CASE("logprob extraction") {
    SUBCASE("both tokens present") {
        std::string body = R"({"choices":[{"message":{"content":"Yes"},
            "logprobs":{"content":[{"token":"Yes","logprob":-0.1,
                "top_logprobs":[{"token":"Yes","logprob":-0.1},{"token":" no","logprob":-2.4}]}]}}]})";
        wire::YesNoExtraction got = wire::extract_yes_no(body);
        REQUIRE(got.logits.has_value());
        CHECK(got.logits->logit_yes == doctest::Approx(-0.1));
        CHECK(got.logits->logit_no == doctest::Approx(-2.4));
    }
    SUBCASE("duplicate variants keep the max") {
        std::string body = R"({"choices":[{"message":{"content":"Yes"},
            "logprobs":{"content":[{"token":"Yes","logprob":-0.1,
                "top_logprobs":[{"token":"Yes","logprob":-0.1},{"token":"yes","logprob":-0.5},
                                {"token":"No","logprob":-3.0}]}]}}]})";
        wire::YesNoExtraction got = wire::extract_yes_no(body);
        REQUIRE(got.logits.has_value());
        CHECK(got.logits->logit_yes == doctest::Approx(-0.1));
    }
    SUBCASE("missing logprobs falls back to the greedy token") {
        std::string body = R"({"choices":[{"message":{"content":"Yes, clearly."}}]})";
        wire::YesNoExtraction got = wire::extract_yes_no(body);
        CHECK_FALSE(got.logits.has_value());
        REQUIRE(got.fallback_yes.has_value());
        CHECK(*got.fallback_yes);
    }
    SUBCASE("neither token anywhere is a protocol error") {
        std::string body = R"({"choices":[{"message":{"content":"Maybe"}}]})";
        CHECK_THROWS_AS(wire::extract_yes_no(body), Error);
    }
    SUBCASE("malformed body is a protocol error") {
        CHECK_THROWS_AS(wire::extract_yes_no("{"), Error);
        CHECK_THROWS_AS(wire::extract_yes_no(R"({"choices":[]})"), Error);
        CHECK_THROWS_AS(wire::extract_completion(R"({"nope":1})"), Error);
    }
}
