#pragma once

#include <string>

// Eigen must precede httplib: <resolv.h> defines `_res` as a macro.
#include "catmap/service.hpp"

#include <httplib.h>

namespace catmap {

/// Routes every GET and POST on `server` through `service`.
inline void mount(httplib::Server& server, Service& service) {
    auto forward = [&service](const httplib::Request& req, httplib::Response& res) {
        Request r;
        r.method = req.method;
        r.path = req.path;
        for (const auto& [k, v] : req.params) r.query.emplace(k, v);
        r.body = req.body;
        const auto out = service.handle(r);
        res.status = out.status;
        res.set_content(out.body, out.content_type);
    };
    server.Get(".*", forward);
    server.Post(".*", forward);
}

}  // namespace catmap
