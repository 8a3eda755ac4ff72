#pragma once

#include "daimon/attacks/brute_force.hpp"
#include "daimon/attacks/inverse.hpp"
#include "daimon/chain/block.hpp"
#include "daimon/chain/chain.hpp"
#include "daimon/chain/persist.hpp"
#include "daimon/chain/token.hpp"
#include "daimon/common/bytes.hpp"
#include "daimon/common/errors.hpp"
#include "daimon/common/rng.hpp"
#include "daimon/common/strings.hpp"
#include "daimon/del/del.hpp"
#include "daimon/del/label_vector.hpp"
#include "daimon/numerics/beta.hpp"
#include "daimon/numerics/mlp.hpp"
#include "daimon/numerics/serialize.hpp"
#include "daimon/poi/blob_store.hpp"
#include "daimon/poi/digest.hpp"
#include "daimon/poi/identity.hpp"
#include "daimon/poi/proof.hpp"
#include "daimon/sim/scenario.hpp"
