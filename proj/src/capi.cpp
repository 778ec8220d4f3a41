#include "bachgeom/bachgeom.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "bachgeom/catalog.hpp"
#include "bachgeom/curvature.hpp"
#include "commands.hpp"

struct bg_context {
  std::string last_error;
};

struct bg_metric {
  bachgeom::MetricField field;
};

namespace {

char* copy_string(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (p) std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

int record(bg_context* ctx, int status, const std::string& msg) {
  if (ctx) ctx->last_error = msg;
  return status;
}

template <class F>
int guarded(bg_context* ctx, F&& f) {
  try {
    f();
    if (ctx) ctx->last_error.clear();
    return BG_OK;
  } catch (const bachgeom::Error& e) {
    return record(ctx, static_cast<int>(e.code()), e.what());
  } catch (const nlohmann::json::exception& e) {
    return record(ctx, BG_CONFIG_PARSE, e.what());
  } catch (const std::exception& e) {
    return record(ctx, BG_INTERNAL, e.what());
  } catch (...) {
    return record(ctx, BG_INTERNAL, "unknown exception");
  }
}

}  // namespace

extern "C" {

const char* bg_version(void) { return "1.0.0"; }

const char* bg_status_name(int status) {
  if (status == 0) return "ok";
  return bachgeom::error_code_name(static_cast<bachgeom::ErrorCode>(status));
}

int bg_status_is_hypothesis_failure(int status) { return bachgeom::cmd::is_hypothesis_failure(status) ? 1 : 0; }

bg_context* bg_context_create(void) { return new (std::nothrow) bg_context(); }

void bg_context_destroy(bg_context* ctx) { delete ctx; }

const char* bg_last_error(const bg_context* ctx) { return ctx ? ctx->last_error.c_str() : ""; }

int bg_run(bg_context* ctx, const char* command, const char* config_json, char** out) {
  if (out) *out = nullptr;
  if (!ctx || !command || !out) return record(ctx, BG_INVALID_ARGUMENT, "null argument");
  nlohmann::json config = nlohmann::json::object();
  if (config_json && *config_json) {
    try {
      config = nlohmann::json::parse(config_json);
    } catch (const nlohmann::json::exception& e) {
      return record(ctx, BG_CONFIG_PARSE, e.what());
    }
  }
  const bachgeom::cmd::Outcome o = bachgeom::cmd::run(command, config);
  *out = copy_string(o.doc.dump(2));
  if (!*out) return record(ctx, BG_INTERNAL, "out of memory");
  if (o.status != 0) return record(ctx, o.status, o.doc["error"]["message"].get<std::string>());
  ctx->last_error.clear();
  return BG_OK;
}

void bg_string_free(char* s) { std::free(s); }

int bg_metric_create(bg_context* ctx, const char* name, const char* params_json, bg_metric** out) {
  if (out) *out = nullptr;
  if (!name || !out) return record(ctx, BG_INVALID_ARGUMENT, "null argument");
  return guarded(ctx, [&] {
    bachgeom::Params params;
    if (params_json && *params_json) {
      const nlohmann::json j = nlohmann::json::parse(params_json);
      if (!j.is_object()) bachgeom::fail(bachgeom::ErrorCode::kConfigParse, "params must be an object");
      for (auto it = j.begin(); it != j.end(); ++it) params[it.key()] = it.value().get<double>();
    }
    *out = new bg_metric{bachgeom::make_metric(name, params)};
  });
}

void bg_metric_destroy(bg_metric* m) { delete m; }

int bg_metric_curvature(bg_context* ctx, const bg_metric* m, const double* x, double* scalar, double* ricci16,
                        double* bach16, double* bach_norm) {
  if (!m || !x) return record(ctx, BG_INVALID_ARGUMENT, "null argument");
  return guarded(ctx, [&] {
    bachgeom::Point p{x[0], x[1], x[2], x[3]};
    p = m->field.domain().canonical(p);
    const bachgeom::PointCurvature c = bachgeom::point_curvature(m->field.taylor(p));
    if (scalar) *scalar = c.scalar;
    if (bach_norm) *bach_norm = c.bach_norm;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        if (ricci16) ricci16[4 * i + j] = c.ricci[i][j];
        if (bach16) bach16[4 * i + j] = c.bach[i][j];
      }
  });
}

}  // extern "C"
