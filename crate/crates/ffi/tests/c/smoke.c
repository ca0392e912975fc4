#include <stdio.h>
#include <string.h>

#include "omegalab.h"

int main(void) {
    OmgSieve *sieve = NULL;
    if (omg_sieve_new(100000, 2, &sieve) != OMG_STATUS_OK) return 1;

    uint8_t counts[12];
    if (omg_sieve_segment(sieve, 1, 13, counts, sizeof counts) != OMG_STATUS_OK) return 2;
    if (counts[11] != 3 || counts[0] != 0) return 3;

    OmgProfile *profile = NULL;
    if (omg_sieve_profile(sieve, 100000, &profile) != OMG_STATUS_OK) return 4;
    uint64_t primes = 0;
    omg_profile_pi_k(profile, 1, &primes);
    double avg = 0.0;
    omg_profile_liouville_average(profile, OMG_SCHEME_CESARO, &avg);

    if (omg_sieve_segment(sieve, 5, 2, counts, sizeof counts) != OMG_STATUS_INVALID_RANGE) return 5;
    char msg[128];
    size_t len = omg_last_error_message(msg, sizeof msg);
    if (len == 0 || strlen(msg) != len) return 6;

    printf("%llu %.6f %s\n", (unsigned long long)primes, avg, msg);
    omg_profile_free(profile);
    omg_sieve_free(sieve);
    return 0;
}
