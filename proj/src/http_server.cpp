// HTTP/JSON transport over CredentialService.

#include <httplib.h>

#include "realcred/error.hpp"
#include "realcred/service.hpp"

namespace realcred {

using nlohmann::json;

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& detail) {
  send_json(res, status, {{"error", code}, {"detail", detail}});
}

json body_of(const httplib::Request& req, bool allow_empty = false) {
  if (req.body.empty()) {
    if (allow_empty) return json::object();
    throw Error(Errc::ParseError, "request body is empty");
  }
  auto j = json::parse(req.body, nullptr, false);
  if (j.is_discarded()) throw Error(Errc::ParseError, "request body is not JSON");
  return j;
}

using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

// Every error leaves as {"error","detail"}; nothing escapes to httplib.
Handler guarded(Handler h) {
  return [h = std::move(h)](const httplib::Request& req, httplib::Response& res) {
    try {
      h(req, res);
    } catch (const Error& e) {
      send_error(res, http_status(e.code()), to_string(e.code()), e.detail());
    } catch (const json::exception& e) {
      send_error(res, 400, to_string(Errc::Malformed), e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "INTERNAL", e.what());
    }
  };
}

json offer_json(const OfferRecord& o) {
  return {{"offer_id", o.offer_id},
          {"redeem_url", "/offers/" + o.offer_id + "/redeem"},
          {"process_id", o.process_id},
          {"expires_at", o.expires}};
}

}  // namespace

struct HttpServer::Impl {
  explicit Impl(CredentialService& s) : service(s) {}
  CredentialService& service;
  httplib::Server server;
};

HttpServer::HttpServer(CredentialService& service) : impl_(std::make_unique<Impl>(service)) {
  auto& svc = impl_->service;
  auto& srv = impl_->server;

  srv.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                           {"Access-Control-Allow-Headers", "Content-Type"},
                           {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
  srv.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  srv.Post("/processes", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
    const auto body = body_of(req);
    if (!body.is_object() || !body.contains("holder_did") || !body["holder_did"].is_string()) {
      throw Error(Errc::InvalidArgument, "holder_did is required");
    }
    send_json(res, 201, to_json(svc.create_process(body["holder_did"].get<std::string>())));
  }));

  srv.Get("/processes", guarded([&svc](const httplib::Request&, httplib::Response& res) {
    json out = json::array();
    for (const auto& p : svc.list_processes()) {
      out.push_back({{"process_id", p.process_id}, {"holder_did", p.holder_did}, {"state", to_string(p.state)}});
    }
    send_json(res, 200, {{"processes", out}});
  }));

  srv.Post(R"(/processes/([^/]+)/documents)", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
    auto batch = batch_from_request(body_of(req));
    send_json(res, 202, to_json(svc.submit(req.matches[1], std::move(batch))));
  }));

  srv.Get(R"(/processes/([^/]+))", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
    send_json(res, 200, to_json(svc.get_process(req.matches[1])));
  }));

  srv.Post(R"(/processes/([^/]+)/validation)", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
    send_json(res, 200, to_json(svc.validate(req.matches[1], validation_from_request(body_of(req)))));
  }));

  srv.Post(R"(/processes/([^/]+)/issue)", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
    send_json(res, 201, offer_json(svc.issue(req.matches[1])));
  }));

  srv.Post(R"(/offers/([^/]+)/redeem)", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
    send_json(res, 200, svc.redeem(req.matches[1]));
  }));

  srv.Post(R"(/credentials/([^/]+)/revoke)", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    const auto list_id = svc.revoke_credential(id);
    send_json(res, 200, {{"credential_id", id}, {"state", "revoked"}, {"status_list", list_id}});
  }));

  srv.Post(R"(/processes/([^/]+)/revoke)", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
    send_json(res, 200, to_json(svc.revoke_process(req.matches[1])));
  }));

  srv.Post("/verify", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
    send_json(res, 200, to_json(svc.verify(body_of(req))));
  }));

  srv.Get(R"(/status-lists/([^/]+))", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
    send_json(res, 200, svc.status_list(req.matches[1]));
  }));

  srv.Get(R"(/dids/(.+))", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
    const std::string uri = req.matches[1];
    const auto entry = svc.resolve_did(uri);
    send_json(res, 200, {{"uri", entry.uri}, {"public_key", entry.public_key}, {"log_entry", to_json(entry)}});
  }));

  // Holder DID registration, outside the workflow paths. {public_key, proof}
  // registers an existing key; {"generate": true} creates a throwaway one.
  srv.Post("/dids", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
    const auto body = body_of(req);
    if (!body.is_object()) throw Error(Errc::InvalidArgument, "body must be an object");
    DidLogEntry entry;
    if (body.value("generate", false)) {
      entry = svc.register_generated_did();
    } else {
      const auto pk = base64url_decode(body.at("public_key").get<std::string>());
      const auto proof = base64url_decode(body.at("proof").get<std::string>());
      PublicKey key{};
      if (!pk || pk->size() != key.size()) throw Error(Errc::InvalidArgument, "public_key must be 32 bytes, base64url");
      if (!proof) throw Error(Errc::InvalidArgument, "proof must be base64url");
      std::copy(pk->begin(), pk->end(), key.begin());
      entry = svc.register_did(key, *proof);
    }
    send_json(res, 201, {{"uri", entry.uri}, {"public_key", entry.public_key}, {"log_entry", to_json(entry)}});
  }));

  srv.Get("/issuer", guarded([&svc](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, {{"did", svc.issuer_did()}});
  }));

  srv.Get(R"(/credentials/([^/]+))", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
    auto vc = svc.credential(req.matches[1]);
    if (!vc) throw Error(Errc::UnknownCredential, req.matches[1]);
    send_json(res, 200, *vc);
  }));

  srv.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) {
      send_error(res, res.status, res.status == 404 ? "NOT_FOUND" : "HTTP_ERROR", "no route for this request");
    }
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  auto& srv = impl_->server;
  const int bound = port == 0 ? srv.bind_to_any_port(host) : (srv.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error(Errc::IoFailure, "cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void HttpServer::serve() { impl_->server.listen_after_bind(); }

void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

void HttpServer::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

}  // namespace realcred
