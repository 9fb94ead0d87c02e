#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include <json.hpp>

#include "handles.hpp"

namespace httplib {
class Server;
}

namespace qttt_cli {

/// In-memory game sessions behind the REST API:
///
///   POST   /api/games              {version, human_mark, agent_checkpoint?, seed?} -> 201 {game_id, state}
///   GET    /api/games/{id}         -> state
///   POST   /api/games/{id}/moves   {action: 0..44} -> state (agent replies when it is its turn)
///   GET    /api/games/{id}/record  -> game record
///   DELETE /api/games/{id}         -> 204
///   GET    /api/health
///
/// Errors carry {"error": code, "message": text}: 400 bad_request, 404
/// not_found, 409 illegal_move / not_your_turn / game_over.
class GameService {
 public:
  /// `default_checkpoint` answers for games that name no checkpoint.
  explicit GameService(std::string default_checkpoint, std::uint64_t seed = 0);
  ~GameService();

  GameService(const GameService&) = delete;
  GameService& operator=(const GameService&) = delete;

  void install(httplib::Server& server);

  struct Reply {
    int status = 200;
    nlohmann::json body;
  };

  Reply create_game(const std::string& body);
  Reply get_game(const std::string& id);
  Reply get_record(const std::string& id);
  Reply post_move(const std::string& id, const std::string& body);
  Reply delete_game(const std::string& id);

 private:
  struct Session;

  std::shared_ptr<Session> find(const std::string& id);
  std::shared_ptr<qttt_agent> agent_for(const std::string& checkpoint);
  // Lets the agent move while it is its turn. Caller holds the session lock.
  void agent_reply(Session& s);
  nlohmann::json state_of(const Session& s) const;

  std::string default_checkpoint_;
  std::uint64_t seed_;
  std::uint64_t next_id_ = 1;
  std::mutex mu_;  // guards sessions_, agents_, next_id_
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::map<std::string, std::shared_ptr<qttt_agent>> agents_;
};

/// Blocks serving on host:port. Returns kExitFailure with a message on `err`
/// if the port cannot be bound.
int cmd_serve(const std::string& checkpoint, const std::string& host, int port, std::uint64_t seed,
              std::ostream& out, std::ostream& err);

}  // namespace qttt_cli
