#!/usr/bin/env python3
"""Smoke-test a running memory service: scripts/smoke_api.py [base_url]"""
import sys
from time import sleep

import httpx

EPISODE = {
    "trajectory": {
        "turns": [
            {"user_utterance": "My blender lid cracked on day one.", "agent_action": "Offered a discount code."},
            {
                "user_utterance": "This is frustrating, I want a replacement.",
                "reward": {"reward": 0.0, "action": 0.0, "search": 1.0, "output": 0.0},
            },
        ],
        "scenario": "Customer needs a replacement blender lid.",
        "user_id": "smoke-user",
        "shop_id": "smoke-shop",
        "platform": "smoke-mall",
    }
}


def smoke_api(base_url: str = "http://127.0.0.1:8000") -> bool:
    api = f"{base_url}/v1"

    print("=" * 60)
    print("Testing MemOrb API")
    print("=" * 60)
    print()

    print("⏳ Waiting for API to start...")
    for i in range(10):
        try:
            if httpx.get(f"{api}/health", timeout=2).status_code == 200:
                print("✓ API is running!")
                break
        except httpx.TransportError:
            sleep(1)
            if i == 9:
                print("✗ Could not connect to API")
                print("  Make sure the service is running: scripts/memorb.py serve")
                return False

    with httpx.Client(base_url=api, timeout=30) as client:
        print()
        print("-" * 60)
        print("Test 1: Ingest Episode")
        print("-" * 60)
        try:
            response = client.post("/episodes", json=EPISODE)
            response.raise_for_status()
            orb_id = response.json()["orb_id"]
            print(f"Orb: {orb_id}")
            print(f"Validation: {response.json()['validation']}")
            print("✓ PASSED")
        except Exception as e:
            print(f"✗ FAILED: {e}")
            return False

        print()
        print("-" * 60)
        print("Test 2: Retrieve")
        print("-" * 60)
        try:
            response = client.post("/retrieve", json={"query": "replacement blender lid", "requesting_user": "someone-else"})
            response.raise_for_status()
            hits = [hit["orb_id"] for hit in response.json()["hits"]]
            print(f"Hits: {len(hits)} (k={response.json()['k_requested']})")
            if orb_id not in hits:
                print("✗ FAILED: ingested orb not retrieved")
                return False
            print("✓ PASSED")
        except Exception as e:
            print(f"✗ FAILED: {e}")
            return False

        print()
        print("-" * 60)
        print("Test 3: Fetch Orb and Stats")
        print("-" * 60)
        try:
            orb = client.get(f"/orbs/{orb_id}").json()
            stats = client.get("/stats").json()
            print(f"Emotion: {orb['emotion']}")
            print(f"Orbs: {stats['orb_count']}  Vectors: {stats['vector_count']}")
            print("✓ PASSED")
        except Exception as e:
            print(f"✗ FAILED: {e}")
            return False

        print()
        print("-" * 60)
        print("Test 4: Request ID Header")
        print("-" * 60)
        request_id = client.get("/health").headers.get("X-Request-ID")
        print(f"Request ID: {request_id}")
        if not request_id:
            print("✗ FAILED: No request ID in headers")
            return False
        print("✓ PASSED")

    print()
    print("=" * 60)
    print("All Tests Passed! ✓")
    print("=" * 60)
    print()
    return True


if __name__ == "__main__":
    success = smoke_api(*sys.argv[1:2])
    sys.exit(0 if success else 1)
