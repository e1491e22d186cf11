#pragma once

#include <memory>
#include <string>
#include <thread>

#include <httplib.h>

#include "sdv/entity_service.hpp"

namespace sdv {

namespace detail {

inline std::string url_encode_value(std::string_view v) {
  static const char* hex = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : v) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out += static_cast<char>(c);
    } else {
      out += '%';
      out += hex[c >> 4];
      out += hex[c & 0xF];
    }
  }
  return out;
}

} // namespace detail

/// REST surface over an EntityService:
///   GET /entities                      entity listing (JSON)
///   GET /entities/<path>/meta          entity description (JSON)
///   GET /entities/<path>?p=v&proof=x   entity body, text/turtle (or text/csv
///                                      for SELECT-filtered entities);
///                                      proof=true returns a multipart body
/// Every entity response carries an ETag (canonical body digest) and an
/// X-Entity-Provenance header listing transitively fetched input URLs.
class HttpServer {
public:
  explicit HttpServer(EntityService& service) : service_(service) {
    server_.new_task_queue = [] { return new httplib::ThreadPool(16); };

    server_.Get("/entities", [this](const httplib::Request&, httplib::Response& res) {
      res.set_content(service_.entity_list().dump(2), "application/json");
    });

    server_.Get("/entities/(.+)", [this](const httplib::Request& req, httplib::Response& res) {
      handle_entity(req, res);
    });

    // loopback client for converted entities whose inputs point back at this
    // process
    service_.set_http_fetch([](const std::string& url) {
      size_t scheme = url.find("://");
      if (scheme == std::string::npos) throw FetchError("malformed URL", url);
      size_t path_start = url.find('/', scheme + 3);
      std::string host_port = url.substr(0, path_start == std::string::npos ? url.size() : path_start);
      std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);
      httplib::Client client(host_port);
      client.set_connection_timeout(10);
      client.set_read_timeout(60);
      // re-encode the query string: values may hold raw IRIs
      size_t q = path.find('?');
      if (q != std::string::npos) {
        std::string encoded = path.substr(0, q + 1);
        std::string query = path.substr(q + 1);
        size_t pos = 0;
        bool first = true;
        while (pos <= query.size()) {
          size_t amp = query.find('&', pos);
          std::string pair =
              query.substr(pos, amp == std::string::npos ? std::string::npos : amp - pos);
          size_t eq = pair.find('=');
          if (!pair.empty()) {
            if (!first) encoded += '&';
            first = false;
            if (eq == std::string::npos) {
              encoded += pair;
            } else {
              encoded += pair.substr(0, eq + 1);
              encoded += detail::url_encode_value(pair.substr(eq + 1));
            }
          }
          if (amp == std::string::npos) break;
          pos = amp + 1;
        }
        path = encoded;
      }
      auto result = client.Get(path);
      if (!result) throw FetchError("connection failed", url);
      if (result->status != 200)
        throw FetchError("input returned HTTP " + std::to_string(result->status), url);
      std::vector<std::string> transitive;
      if (result->has_header("X-Entity-Provenance")) {
        std::string header = result->get_header_value("X-Entity-Provenance");
        size_t pos = 0;
        while (pos < header.size()) {
          size_t comma = header.find(", ", pos);
          transitive.push_back(
              header.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
          if (comma == std::string::npos) break;
          pos = comma + 2;
        }
      }
      return std::make_pair(result->body, transitive);
    });
  }

  /// Binds to the configured address (port 0 picks a free port). Returns
  /// false when the bind fails.
  bool start() {
    const ServiceConfig& cfg = service_.config();
    if (cfg.listen_port == 0) {
      int port = server_.bind_to_any_port(cfg.listen_host);
      if (port <= 0) return false;
      port_ = port;
    } else {
      if (!server_.bind_to_port(cfg.listen_host, cfg.listen_port)) return false;
      port_ = cfg.listen_port;
    }
    service_.set_live_port(port_);
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
    return true;
  }

  int port() const { return port_; }

  void stop() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  void wait() {
    if (thread_.joinable()) thread_.join();
  }

  ~HttpServer() { stop(); }

private:
  void handle_entity(const httplib::Request& req, httplib::Response& res) {
    std::string path = req.matches[1];
    bool meta = false;
    if (path.size() > 5 && path.compare(path.size() - 5, 5, "/meta") == 0) {
      meta = true;
      path.resize(path.size() - 5);
    }

    try {
      const EntityConfig& cfg = service_.resolve(path);
      if (meta) {
        res.set_content(service_.entity_meta(cfg).dump(2), "application/json");
        return;
      }

      EntityRequest er;
      er.path = path;
      for (const auto& [key, value] : req.params) {
        if (key == "proof") er.want_proof = value == "true";
        else er.params[key] = value;
      }

      ProduceResult result = service_.produce(er);
      std::string body = result.body_text();
      res.set_header("ETag", "\"" + result.etag() + "\"");
      if (!result.provenance.empty()) {
        std::string prov;
        for (const std::string& url : result.provenance) {
          if (!prov.empty()) prov += ", ";
          prov += url;
        }
        res.set_header("X-Entity-Provenance", prov);
      }

      if (er.want_proof && result.proof) {
        static const char* boundary = "sdv-entity-proof";
        std::string multipart;
        multipart += "--" + std::string(boundary) + "\r\n";
        multipart += "Content-Type: " + result.content_type() + "\r\n\r\n";
        multipart += body;
        multipart += "\r\n--" + std::string(boundary) + "\r\n";
        multipart += "Content-Type: application/json\r\n\r\n";
        multipart += result.proof->to_json().dump(2);
        multipart += "\r\n--" + std::string(boundary) + "--\r\n";
        res.set_content(multipart, ("multipart/mixed; boundary=" + std::string(boundary)).c_str());
      } else {
        res.set_content(body, result.content_type().c_str());
      }
    } catch (const NotFoundError& e) {
      res.status = 404;
      res.set_content(e.what(), "text/plain");
    } catch (const ParamError& e) {
      res.status = 400;
      res.set_content(e.what(), "text/plain");
    } catch (const FetchError& e) {
      res.status = 502;
      res.set_content(std::string(e.what()) + (e.url().empty() ? "" : " (" + e.url() + ")"),
                      "text/plain");
    } catch (const Error& e) {
      res.status = 500;
      res.set_content(e.what(), "text/plain");
    }
  }

  EntityService& service_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
};

} // namespace sdv
