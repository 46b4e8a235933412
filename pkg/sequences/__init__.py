# Integer sequence sources, primality and gap analysis