from tools.verification import bnBufferDigest, bnStatsDigest, verifyZoo, resolveProvenanceChain
