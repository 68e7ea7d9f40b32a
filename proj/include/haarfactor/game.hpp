#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "haarfactor/blocks.hpp"

namespace haarfactor {

enum class GameBranch { Thm25, Thm27 };
enum class ConstraintMode { Tolerant, Strict };

std::string branch_name(GameBranch b);
GameBranch branch_from_name(const std::string& s);
std::string mode_name(ConstraintMode m);
ConstraintMode mode_from_name(const std::string& s);

struct GameConfig {
    ZTrunc big;
    ZTrunc small;
    double eta = 0.1;
    GameBranch branch = GameBranch::Thm25;
    std::uint64_t seed = 0;
    std::optional<double> delta;  // required lower bound for the diagonal; defaults to the measured one
    double C = 1.0;               // equivalence constant targeted by Player II
    double norm_slack = 2.0;      // ||T|| in the schedule is slack * certified lower bound
    ConstraintMode mode = ConstraintMode::Tolerant;
    unsigned threads = 1;
    int norm_trials = 3;
    int equivalence_samples = 64;
    std::vector<std::vector<int>> omega;  // thm_2_5; empty means congruence classes mod 2
    std::optional<double> rho;            // select_gamma slack; defaults to eta

    void validate() const;
    std::vector<std::vector<int>> effective_omega() const;
};

// Thrown by strategies; run_game turns it into an aborted transcript.
struct GameAbort : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PlayerIMove {
    std::int64_t n = 0;  // 0-based turn
    int host = 0;
    double eta_n = 0.0;
    std::int64_t l_n = 1;  // host ordinals [0, l_n) are protected
    // G_n = annihilator of these vectors (big coordinates) inside the host dual.
    std::vector<Eigen::VectorXd> annihilate;
    // thm_2_5: W_n = vectors of the host killed by these functionals (values on the big basis).
    std::vector<Eigen::VectorXd> preannihilate;
    // thm_2_7: V^{(n)} tails, one 0-based start per big component; W_n = tail of the host.
    std::vector<std::int64_t> tails;
};

struct PlayerIIMove {
    int sign_class = 1;  // 1: diagonal >= delta, 2: diagonal <= -delta
    std::vector<std::int64_t> E;
    std::vector<double> lambda;
    std::vector<double> mu;
    double dist_G = 0.0;  // certified lower bound of dist(x*_n, G_n); 0 is exact
    double dist_W = 0.0;  // lower bound (thm_2_5) or head norm (thm_2_7) of dist(x_n, W_n)
    std::string placement;
};

struct SignChoice {
    std::vector<int> eps;
    double value = 0.0;  // x*(T x)
    double mean = 0.0;   // sum lambda_i mu_i e*_i(T e_i)
    bool exhaustive = true;
};

struct TurnRecord {
    PlayerIMove p1;
    PlayerIIMove p2;
    SignChoice signs;
};

struct PastEstimate {
    std::int64_t n = 0;
    double value = 0.0;  // max_{m<n} |x*_n(T x_m)|
    double bound = 0.0;  // ||T|| sqrt(C + eta) eta_n
    bool ok = true;
};

struct Transcript {
    int schema_version = 1;
    std::string branch;
    std::string mode;
    std::uint64_t seed = 0;
    double eta = 0.0;
    double delta = 0.0;
    double T_norm_lower = 0.0;
    double T_norm_upper = 0.0;
    double tau = 0.0;  // slack * T_norm_lower, used in the schedule
    std::vector<int> classes;  // pregame class per big global index (1, 2 or 0 when |diag| < delta)
    std::vector<TurnRecord> turns;
    std::vector<std::int64_t> final_tails;  // thm_2_7: V^{(N+1)}
    std::vector<PastEstimate> past;
    bool aborted = false;
    std::string abort_reason;
};

struct GameState {
    const GameConfig& config;
    const OperatorZ& T;
    double delta = 0.0;
    std::vector<int> classes;
    std::vector<Block> played;  // blocks of finished turns, signs included
    std::int64_t n = 0;         // current 0-based turn
};

class PlayerOne {
public:
    virtual ~PlayerOne() = default;
    virtual PlayerIMove move(const GameState& s) = 0;
    virtual SignChoice signs(const GameState& s, const PlayerIMove& m1, const PlayerIIMove& m2) = 0;
    // Tail chain after the last turn (thm_2_7); empty otherwise.
    virtual std::vector<std::int64_t> final_tails(const GameState& s) = 0;
};

class PlayerTwo {
public:
    virtual ~PlayerTwo() = default;
    virtual PlayerIIMove respond(const GameState& s, const PlayerIMove& m1) = 0;
};

// Player I: eta_n schedule, annihilator sets A_n/B_n, nested tail chain, sign selection.
class AdversaryStrategy : public PlayerOne {
public:
    AdversaryStrategy(const OperatorZ& T, const GameConfig& cfg, double T_norm_lower);
    PlayerIMove move(const GameState& s) override;
    SignChoice signs(const GameState& s, const PlayerIMove& m1, const PlayerIIMove& m2) override;
    std::vector<std::int64_t> final_tails(const GameState& s) override;
    double tau() const { return tau_; }

private:
    std::vector<std::int64_t> advance_tails(const GameState& s, std::int64_t upto, double eta_n);

    const OperatorZ& T_;
    const GameConfig& cfg_;
    double tau_;
    std::vector<std::int64_t> tails_;
};

// Player II: faithful Haar copy.  Each small component is copied as a dyadic subtree rooted at a
// placement chosen at its first turn; nodes map to single intervals / rectangles.
class HaarCopyStrategy : public PlayerTwo {
public:
    explicit HaarCopyStrategy(const GameConfig& cfg);
    PlayerIIMove respond(const GameState& s, const PlayerIMove& m1) override;

    struct Placement {
        int shift = -1;  // level shift, -1 while unplaced
        std::int64_t px = 0;
        std::int64_t py = 0;
    };
    const std::vector<Placement>& placements() const { return placed_; }

private:
    const GameConfig& cfg_;
    std::vector<Placement> placed_;
};

// Ordinal in the big component of the image of small ordinal j under a placement.
std::int64_t haar_copy_image(const SpaceSpec& small, const SpaceSpec& big, const HaarCopyStrategy::Placement& p,
                             std::int64_t j);

// Signs with |x*(Tx)| > (1 - eta) delta: exhaustive for |E| <= 20 (first sign fixed to +1,
// Gray-code order), conditional-expectation derandomization beyond.
SignChoice sign_selection(const OperatorZ& T, int host, const std::vector<std::int64_t>& E,
                          const std::vector<double>& lambda, const std::vector<double>& mu, double delta, double eta);

struct GameResult {
    Transcript transcript;
    std::optional<BlockSystem> blocks;  // absent when aborted
};

GameResult run_game(const OperatorZ& T, const GameConfig& cfg, PlayerOne& p1, PlayerTwo& p2, const NormBounds& tnorm);
GameResult run_game(const OperatorZ& T, const GameConfig& cfg, PlayerOne& p1, PlayerTwo& p2);
// Default strategies (AdversaryStrategy with a fresh norm estimate, HaarCopyStrategy).
GameResult run_game(const OperatorZ& T, const GameConfig& cfg);

// Tail chain of a finished thm_2_7 game in the layout verify_conditions expects.
TailChain tail_chain(const Transcript& tr);

struct FactorizeResult {
    FactorizationCertificate certificate;
    Transcript transcript;
    std::optional<GammaSelection> gamma;
    std::vector<bool> gamma_meets_omega;
};

FactorizeResult factorize(const OperatorZ& T, const GameConfig& cfg);

}  // namespace haarfactor
