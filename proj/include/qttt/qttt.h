/*
 * qttt: Quantum Tiq-Taq-Toe engine, environment and self-play PPO agents.
 *
 * C interface to libqttt. All objects are opaque handles created by a
 * qttt_X_new or qttt_X_load function and released by qttt_X_free.
 * Every fallible call returns a qttt_status; on failure a human-readable
 * message is available from qttt_last_error() on the same thread.
 *
 * Strings returned through char** out-parameters are heap allocated by the
 * library and must be released with qttt_string_free().
 *
 * Cells are numbered 1..9 row-major. Action indices 0..8 are classical moves
 * on cells 1..9; 9..44 are split moves on the 36 cell pairs (a, b), a < b, in
 * lexicographic order.
 *
 * Thread safety: distinct handles may be used from different threads. An
 * agent may be shared across threads for qttt_agent_act() as long as each
 * caller passes its own rng handle. A game or rng handle must not be used
 * concurrently.
 */
#ifndef QTTT_QTTT_H_
#define QTTT_QTTT_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(QTTT_BUILDING_LIBRARY)
#define QTTT_API __declspec(dllexport)
#else
#define QTTT_API __declspec(dllimport)
#endif
#else
#define QTTT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qttt_status {
  QTTT_OK = 0,
  QTTT_ERR_INVALID_ARGUMENT = 1,
  QTTT_ERR_ILLEGAL_MOVE = 2,
  QTTT_ERR_GAME_OVER = 3,
  QTTT_ERR_IO = 4,
  QTTT_ERR_FORMAT = 5,
  QTTT_ERR_MISMATCH = 6,
  QTTT_ERR_NUMERIC = 7,
  QTTT_ERR_CONFIG = 8,
  QTTT_ERR_INTERNAL = 99
} qttt_status;

#define QTTT_ACTION_COUNT 45
#define QTTT_CELL_COUNT 9

#define QTTT_RULES_V1 1
#define QTTT_RULES_V3 3

#define QTTT_MARK_EMPTY 0
#define QTTT_MARK_X 1
#define QTTT_MARK_O 2

#define QTTT_RESULT_ONGOING 0
#define QTTT_RESULT_X_WINS 1
#define QTTT_RESULT_O_WINS 2
#define QTTT_RESULT_DRAW 3

typedef struct qttt_game qttt_game;
typedef struct qttt_agent qttt_agent;
typedef struct qttt_rng qttt_rng;

/* Tallies of a series of games. In a pit the first agent plays X in every
 * game and agent_wins/agent_losses/avg_reward are from its side. */
typedef struct qttt_report {
  int games;
  int x_wins;
  int o_wins;
  int draws;
  int agent_wins;
  int agent_losses;
  double avg_reward;
} qttt_report;

QTTT_API const char* qttt_version(void);
QTTT_API const char* qttt_last_error(void);
QTTT_API void qttt_string_free(char* s);

/* ---- random streams ---------------------------------------------------- */

QTTT_API qttt_status qttt_rng_new(uint64_t seed, qttt_rng** out);
QTTT_API void qttt_rng_free(qttt_rng* rng);

/* ---- actions ----------------------------------------------------------- */

/* b == 0 encodes a classical move on cell a. */
QTTT_API qttt_status qttt_action_encode(int a, int b, int* action);
/* Sets *b to 0 for classical actions. */
QTTT_API qttt_status qttt_action_decode(int action, int* a, int* b);

/* ---- games ------------------------------------------------------------- */

/* episode_cap <= 0 selects the default of 50 plies. */
QTTT_API qttt_status qttt_game_new(int rules, uint64_t seed, int episode_cap, qttt_game** out);
QTTT_API qttt_status qttt_game_clone(const qttt_game* game, qttt_game** out);
QTTT_API void qttt_game_free(qttt_game* game);

/* Rebuilds a game from a qttt-game-record JSON document, verifying that
 * every logged collapse reproduces. */
QTTT_API qttt_status qttt_game_from_record(const char* record_json, qttt_game** out);

/* Plays `action` for the side to move. reward is from the mover's side.
 * On QTTT_ERR_ILLEGAL_MOVE or QTTT_ERR_GAME_OVER the game is unchanged.
 * reward and done may be NULL. */
QTTT_API qttt_status qttt_game_step(qttt_game* game, int action, double* reward, int* done);

/* QTTT_ERR_GAME_OVER on a finished game. */
QTTT_API qttt_status qttt_game_legal_mask(const qttt_game* game, uint8_t mask[QTTT_ACTION_COUNT]);
QTTT_API qttt_status qttt_game_turn(const qttt_game* game, int* mark);
QTTT_API qttt_status qttt_game_result(const qttt_game* game, int* result);
QTTT_API qttt_status qttt_game_move_count(const qttt_game* game, int* count);
/* Exact per-cell (empty, X, O) probabilities, row-major 9 x 3. */
QTTT_API qttt_status qttt_game_marginals(const qttt_game* game, double out[27]);

/* State document: turn, result, board_status, marginals, mh_x, mh_o,
 * legal_actions, history, collapse_events. */
QTTT_API qttt_status qttt_game_state_json(const qttt_game* game, char** out);
QTTT_API qttt_status qttt_game_record_json(const qttt_game* game, char** out);
/* Full amplitude dump (qttt-statevector, encoding version 1). */
QTTT_API qttt_status qttt_game_statevector_json(const qttt_game* game, char** out);
/* Encoded observation for the side to move. mode is "m", "h" or "mh";
 * n_samples <= 0 selects the default of 100. record_ref is echoed back. */
QTTT_API qttt_status qttt_game_observation_json(const qttt_game* game, const char* mode, int n_samples, int exact,
                                                qttt_rng* rng, const char* record_ref, char** out);

/* ---- agents ------------------------------------------------------------ */

QTTT_API qttt_status qttt_agent_random(qttt_agent** out);
QTTT_API qttt_status qttt_agent_load(const char* checkpoint_path, qttt_agent** out);
QTTT_API void qttt_agent_free(qttt_agent* agent);
/* {"kind", "obs_mode", "rule_version", "hidden", "training_step", ...} */
QTTT_API qttt_status qttt_agent_info_json(const qttt_agent* agent, char** out);
/* Switches between greedy (0, default) and sampled (1) action selection. */
QTTT_API qttt_status qttt_agent_set_sampling(qttt_agent* agent, int sample);
QTTT_API qttt_status qttt_agent_act(const qttt_agent* agent, const qttt_game* game, qttt_rng* rng, int* action);

/* ---- training and evaluation ------------------------------------------ */

/* Called once per evaluation with a metrics CSV row (no newline). */
typedef void (*qttt_metrics_callback)(const char* csv_row, void* user);

/* Parses and validates a run configuration. On success *normalized (if
 * non-NULL) receives the config with every default filled in. On
 * QTTT_ERR_CONFIG the error message starts with "config line N:". */
QTTT_API qttt_status qttt_config_validate(const char* config_json, char** normalized);

QTTT_API qttt_status qttt_train(const char* config_json, const char* out_dir, qttt_metrics_callback callback,
                                void* user);

/* `agent` alternates sides: X in even games, O in odd games. */
QTTT_API qttt_status qttt_evaluate(const qttt_agent* agent, const qttt_agent* opponent, int rules, int games,
                                   uint64_t seed, qttt_report* out);

/* x_agent plays X in every game. outcomes (may be NULL) receives `games`
 * QTTT_RESULT_* values. */
QTTT_API qttt_status qttt_pit(const qttt_agent* x_agent, const qttt_agent* o_agent, int rules, int games,
                              uint64_t seed, qttt_report* out, int* outcomes);

#ifdef __cplusplus
}
#endif

#endif /* QTTT_QTTT_H_ */
