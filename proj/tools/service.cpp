#include "service.hpp"

#include <httplib.h>

#include <ostream>

#include "commands.hpp"

namespace qttt_cli {

using nlohmann::json;

struct GameService::Session {
  std::mutex mu;
  Game game;
  Rng agent_rng;
  std::shared_ptr<qttt_agent> agent;
  int human_mark = QTTT_MARK_X;
  std::string id;
  std::string checkpoint;
};

namespace {

GameService::Reply error_reply(int status, const std::string& code, const std::string& message) {
  return {status, {{"error", code}, {"message", message}}};
}

// Mixes the agent stream away from the game's own collapse stream.
constexpr std::uint64_t kAgentStreamSalt = 0x5bd1e995ULL;

}  // namespace

GameService::GameService(std::string default_checkpoint, std::uint64_t seed)
    : default_checkpoint_(std::move(default_checkpoint)), seed_(seed) {
  // Fail early on a bad default checkpoint.
  agent_for(default_checkpoint_);
}

GameService::~GameService() = default;

std::shared_ptr<qttt_agent> GameService::agent_for(const std::string& checkpoint) {
  std::lock_guard lock(mu_);
  auto it = agents_.find(checkpoint);
  if (it != agents_.end()) return it->second;
  std::shared_ptr<qttt_agent> agent(load_agent(checkpoint).release(), AgentDeleter{});
  agents_.emplace(checkpoint, agent);
  return agent;
}

std::shared_ptr<GameService::Session> GameService::find(const std::string& id) {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

json GameService::state_of(const Session& s) const {
  json state = state_json(s.game.get());
  state["game_id"] = s.id;
  state["human_mark"] = s.human_mark == QTTT_MARK_X ? "x" : "o";
  state["agent_checkpoint"] = s.checkpoint;
  return state;
}

void GameService::agent_reply(Session& s) {
  for (;;) {
    int result = 0;
    int turn = 0;
    check(qttt_game_result(s.game.get(), &result));
    if (result != QTTT_RESULT_ONGOING) return;
    check(qttt_game_turn(s.game.get(), &turn));
    if (turn == s.human_mark) return;
    int action = 0;
    check(qttt_agent_act(s.agent.get(), s.game.get(), s.agent_rng.get(), &action));
    check(qttt_game_step(s.game.get(), action, nullptr, nullptr));
  }
}

GameService::Reply GameService::create_game(const std::string& body) {
  json req;
  try {
    req = body.empty() ? json::object() : json::parse(body);
  } catch (const json::parse_error& e) {
    return error_reply(400, "bad_request", std::string("malformed JSON: ") + e.what());
  }
  if (!req.is_object()) return error_reply(400, "bad_request", "request body must be a JSON object");

  auto session = std::make_shared<Session>();
  int rules = QTTT_RULES_V1;
  std::uint64_t game_seed = 0;
  try {
    const std::string version = req.value("version", std::string("v1"));
    rules = parse_rules(version);
    const std::string mark = req.value("human_mark", std::string("x"));
    if (mark == "x" || mark == "X") {
      session->human_mark = QTTT_MARK_X;
    } else if (mark == "o" || mark == "O") {
      session->human_mark = QTTT_MARK_O;
    } else {
      return error_reply(400, "bad_request", "human_mark must be \"x\" or \"o\"");
    }
    session->checkpoint = req.value("agent_checkpoint", default_checkpoint_);
    if (req.contains("seed")) {
      if (!req["seed"].is_number_unsigned()) return error_reply(400, "bad_request", "seed must be a non-negative integer");
      game_seed = req["seed"].get<std::uint64_t>();
    }
  } catch (const json::type_error& e) {
    return error_reply(400, "bad_request", e.what());
  } catch (const std::invalid_argument& e) {
    return error_reply(400, "bad_request", e.what());
  }

  try {
    session->agent = agent_for(session->checkpoint);
  } catch (const std::exception& e) {
    return error_reply(400, "bad_request", std::string("cannot load agent: ") + e.what());
  }
  const json info = agent_info(session->agent.get());
  if (info["kind"] == "policy" && info["rule_version"] != rules_name(rules)) {
    return error_reply(400, "bad_request",
                       "checkpoint was trained on rules " + info["rule_version"].get<std::string>() +
                           " but the game uses " + rules_name(rules));
  }

  {
    std::lock_guard lock(mu_);
    const std::uint64_t n = next_id_++;
    session->id = std::to_string(n);
    if (!req.contains("seed")) game_seed = seed_ + n;
  }
  session->game = new_game(rules, game_seed);
  session->agent_rng = new_rng(game_seed ^ kAgentStreamSalt);

  std::lock_guard session_lock(session->mu);
  {
    std::lock_guard lock(mu_);
    sessions_[session->id] = session;
  }
  agent_reply(*session);
  return {201, {{"game_id", session->id}, {"state", state_of(*session)}}};
}

GameService::Reply GameService::get_game(const std::string& id) {
  auto s = find(id);
  if (!s) return error_reply(404, "not_found", "no game with id " + id);
  std::lock_guard lock(s->mu);
  return {200, state_of(*s)};
}

GameService::Reply GameService::get_record(const std::string& id) {
  auto s = find(id);
  if (!s) return error_reply(404, "not_found", "no game with id " + id);
  std::lock_guard lock(s->mu);
  return {200, record_json(s->game.get())};
}

GameService::Reply GameService::post_move(const std::string& id, const std::string& body) {
  auto s = find(id);
  if (!s) return error_reply(404, "not_found", "no game with id " + id);

  json req;
  try {
    req = json::parse(body);
  } catch (const json::parse_error& e) {
    return error_reply(400, "bad_request", std::string("malformed JSON: ") + e.what());
  }
  if (!req.is_object() || !req.contains("action") || !req["action"].is_number_integer()) {
    return error_reply(400, "bad_request", "body must be {\"action\": 0..44}");
  }
  const int action = req["action"].get<int>();
  if (action < 0 || action >= QTTT_ACTION_COUNT) {
    return error_reply(400, "bad_request", "action must be in 0..44");
  }

  std::lock_guard lock(s->mu);
  int result = 0;
  int turn = 0;
  check(qttt_game_result(s->game.get(), &result));
  if (result != QTTT_RESULT_ONGOING) return error_reply(409, "game_over", "the game has finished");
  check(qttt_game_turn(s->game.get(), &turn));
  if (turn != s->human_mark) return error_reply(409, "not_your_turn", "it is the agent's turn");

  const qttt_status st = qttt_game_step(s->game.get(), action, nullptr, nullptr);
  if (st == QTTT_ERR_ILLEGAL_MOVE) {
    Reply r = error_reply(409, "illegal_move", qttt_last_error());
    r.body["state"] = state_of(*s);
    return r;
  }
  check(st);
  agent_reply(*s);
  return {200, state_of(*s)};
}

GameService::Reply GameService::delete_game(const std::string& id) {
  std::lock_guard lock(mu_);
  if (sessions_.erase(id) == 0) return error_reply(404, "not_found", "no game with id " + id);
  return {204, nullptr};
}

void GameService::install(httplib::Server& server) {
  // httplib defaults to SO_REUSEPORT, which lets a second server share a busy port silently.
  server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
  });
  auto send = [](httplib::Response& res, const Reply& r) {
    res.status = r.status;
    if (r.status != 204) res.set_content(r.body.dump(), "application/json");
  };

  server.Get("/api/health", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(json{{"status", "ok"}, {"version", qttt_version()}}.dump(), "application/json");
  });
  server.Post("/api/games", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, create_game(req.body));
  });
  server.Get(R"(/api/games/([^/]+))", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, get_game(req.matches[1]));
  });
  server.Get(R"(/api/games/([^/]+)/record)", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, get_record(req.matches[1]));
  });
  server.Post(R"(/api/games/([^/]+)/moves)", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, post_move(req.matches[1], req.body));
  });
  server.Delete(R"(/api/games/([^/]+))", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, delete_game(req.matches[1]));
  });

  server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string message = "internal error";
    try {
      if (ep) std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      message = e.what();
    } catch (...) {
    }
    res.status = 500;
    res.set_content(json{{"error", "internal"}, {"message", message}}.dump(), "application/json");
  });
  server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (!res.body.empty()) return;
    const std::string code = res.status == 404 ? "not_found" : "bad_request";
    res.set_content(json{{"error", code}, {"message", "no such route"}}.dump(), "application/json");
  });
}

int cmd_serve(const std::string& checkpoint, const std::string& host, int port, std::uint64_t seed,
              std::ostream& out, std::ostream& err) {
  std::unique_ptr<GameService> service;
  try {
    service = std::make_unique<GameService>(checkpoint, seed);
  } catch (const std::exception& e) {
    err << "error: cannot load agent '" << checkpoint << "': " << e.what() << '\n';
    return kExitUsage;
  }
  httplib::Server server;
  service->install(server);
  if (!server.bind_to_port(host, port)) {
    err << "error: cannot listen on " << host << ':' << port << " (port busy or not permitted)\n";
    return kExitFailure;
  }
  out << "serving on http://" << host << ':' << port << "/api (agent: " << checkpoint << ")" << std::endl;
  server.listen_after_bind();
  return kExitOk;
}

}  // namespace qttt_cli
