#include <httplib.h>
#include <json.hpp>

#include "seedrank/corpus_io.hpp"
#include "seedrank/error.hpp"

namespace seedrank {

namespace {

struct Endpoint {
    std::string base;  // scheme://host[:port]
    std::string path;
};

Endpoint split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw Error(ErrorKind::Config, "annotator URL needs a scheme: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

Lexicon fetch_annotations(const std::string& endpoint, std::span<const Document> documents,
                          std::size_t batch_size) {
    if (batch_size == 0) throw Error(ErrorKind::Contract, "batch size must be positive");
    const auto ep = split_url(endpoint);
    httplib::Client client(ep.base);
    client.set_connection_timeout(10);
    client.set_read_timeout(120);

    Lexicon lexicon;
    for (std::size_t start = 0; start < documents.size(); start += batch_size) {
        const auto end = std::min(documents.size(), start + batch_size);
        nlohmann::json body;
        body["texts"] = nlohmann::json::array();
        for (std::size_t i = start; i < end; ++i) {
            body["texts"].push_back(documents[i].title + " " + documents[i].abstract);
        }

        auto res = client.Post(ep.path, body.dump(), "application/json");
        if (!res) {
            throw Error(ErrorKind::Transport,
                        "annotator request failed: " + httplib::to_string(res.error()));
        }
        if (res->status != 200) {
            throw Error(ErrorKind::Transport, "annotator returned HTTP " + std::to_string(res->status));
        }

        nlohmann::json reply;
        try {
            reply = nlohmann::json::parse(res->body);
        } catch (const nlohmann::json::parse_error& e) {
            throw Error(ErrorKind::Protocol, std::string("annotator reply is not JSON: ") + e.what());
        }
        if (!reply.is_object() || !reply.contains("tokens") || !reply["tokens"].is_array()) {
            throw Error(ErrorKind::Protocol, "annotator reply lacks a 'tokens' array");
        }
        const auto& lists = reply["tokens"];
        if (lists.size() != end - start) {
            throw Error(ErrorKind::Protocol, "annotator returned " + std::to_string(lists.size()) +
                                                 " token lists for " + std::to_string(end - start) + " texts");
        }
        for (const auto& list : lists) {
            if (!list.is_array()) throw Error(ErrorKind::Protocol, "annotator token list is not an array");
            for (const auto& tok : list) {
                if (!tok.is_string()) throw Error(ErrorKind::Protocol, "annotator token is not a string");
                lexicon.insert(tok.get<std::string>());
            }
        }
    }
    return lexicon;
}

}  // namespace seedrank
