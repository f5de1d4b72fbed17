#pragma once

#include "zkseries/group.hpp"

namespace zkseries {

// Statement for the product relation: c_x, c_y, c_xy hide x, y and x*y.
struct ZkmpStatement {
    Point c_x, c_y, c_xy;
};

struct ZkmpWitness {
    Scalar x, y, r_x, r_y, r_xy;
};

// Sigma-protocol proof of the product relation, made non-interactive via the
// transcript: three announcements, one transcript challenge, five responses.
struct ZkmpProof {
    Point t_x, t_y, t_z;
    Scalar z_x, z_y, s_x, s_y, s_z;
};

// Throws std::invalid_argument if the witness does not open the statement
// (checked before any proof material is produced).
ZkmpProof zkmp_prove(const CommitParams& params, Transcript& transcript,
                     const ZkmpStatement& stmt, const ZkmpWitness& wit, ScalarRng& rng);

// Total: malformed encodings simply verify false.
bool zkmp_verify(const CommitParams& params, Transcript& transcript, const ZkmpStatement& stmt,
                 const ZkmpProof& proof);

}  // namespace zkseries
