"""Goal mediation for smart environments"""
