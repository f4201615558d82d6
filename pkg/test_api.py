"""
Simple test script for the REST API endpoints.
"""

import sys
sys.path.insert(0, 'src')

from curvepair.api import create_app
import json


def test_api():
    """Test the API endpoints."""
    print("=" * 70)
    print("Testing REST API Endpoints")
    print("=" * 70)

    # Create app in test mode
    app = create_app({'TESTING': True})
    client = app.test_client()

    # Test 1: Health check
    print("\n1. Testing GET /health")
    response = client.get('/health')
    print(f"   Status: {response.status_code}")
    data = json.loads(response.data)
    print(f"   Settings: {data['data']['settings']}")
    assert response.status_code == 200
    assert data['success'] == True
    assert data['data']['status'] == 'healthy'
    print("   ✓ Health check passed")

    # Test 2: Approximation
    print("\n2. Testing POST /approx")
    response = client.post('/approx',
        json={
            'f': 'x^2 + y^2 - 4',
            'g': '(x-2)^2 + y^2 - 4',
            'region': [-4, -4, 4, 4],
            'emit_partition': True
        },
        content_type='application/json'
    )
    print(f"   Status: {response.status_code}")
    data = json.loads(response.data)
    print(f"   Message: {data['message']}")
    assert response.status_code == 200
    assert data['success'] == True
    report = data['data']
    assert report['schema'] == 1
    assert len(report['crossings']) == 2
    assert report['closed'] == {'f': [True], 'g': [True]}
    assert report['boxes']
    print("   ✓ Approximation endpoint passed")

    # Test 3: Missing body and missing fields
    print("\n3. Testing POST /approx without a usable body")
    response = client.post('/approx', data='not json', content_type='text/plain')
    print(f"   Status: {response.status_code}")
    assert response.status_code == 400
    assert json.loads(response.data)['error']['stage'] == 'request'
    response = client.post('/approx', json={'f': 'x'})
    data = json.loads(response.data)
    assert response.status_code == 400
    assert data['error']['type'] == 'ConfigurationError'
    assert data['error']['stage'] == 'config'
    assert data['error']['details']['missing'] == ['g', 'region']
    assert 'box' not in data['error']
    print("   ✓ Validation errors returned")

    # Test 4: Bad polynomial
    print("\n4. Testing POST /approx with a malformed polynomial")
    response = client.post('/approx', json={'f': '2x', 'g': 'y', 'region': [-1, -1, 1, 1]})
    data = json.loads(response.data)
    print(f"   Status: {response.status_code}")
    print(f"   Error: {data['error']['message']}")
    assert response.status_code == 400
    assert data['error']['stage'] == 'parse'
    assert data['error']['details']['position'] == 1
    print("   ✓ Parse error returned")

    # Test 5: Pipeline failure
    print("\n5. Testing POST /approx on a singular curve")
    response = client.post('/approx', json={
        'f': 'x^2 - y^2', 'g': 'y - 3', 'region': [-1, -1, 1, 1], 'max_depth': 6
    })
    data = json.loads(response.data)
    print(f"   Status: {response.status_code}")
    assert response.status_code == 422
    assert data['error']['type'] == 'MaxDepthExceeded'
    assert data['error']['stage'] == 'subdivide'
    assert data['error']['box']['depth'] == 6
    print("   ✓ Depth cap reported")

    # Test 6: Oracle
    print("\n6. Testing POST /verify")
    response = client.post('/verify', json={'f': 'x', 'g': 'y', 'region': [-1, -1, 1, 1], 'grid_depth': 3})
    data = json.loads(response.data)
    print(f"   Status: {response.status_code}")
    print(f"   Message: {data['message']}")
    assert response.status_code == 200
    assert data['data']['count'] == 1
    assert data['data']['smooth_transversal'] == True
    response = client.post('/verify', json={'f': 'x', 'g': 'y', 'region': [1, 1, -1, -1]})
    assert response.status_code == 400
    print("   ✓ Verify endpoint passed")

    # Test 7: Render
    print("\n7. Testing POST /render")
    response = client.post('/render', json=report)
    print(f"   Status: {response.status_code}")
    print(f"   Content type: {response.mimetype}")
    assert response.status_code == 200
    assert response.mimetype == 'image/svg+xml'
    assert b'<svg' in response.data
    response = client.post('/render', json={'schema': 2})
    assert response.status_code == 422
    print("   ✓ Render endpoint passed")

    # Test 8: 404 error
    print("\n8. Testing 404 error handling")
    response = client.get('/nonexistent')
    print(f"   Status: {response.status_code}")
    data = json.loads(response.data)
    assert response.status_code == 404
    assert data['error']['type'] == 'NotFoundError'
    assert data['error']['stage'] == 'request'
    assert '/approx' in data['error']['details']['endpoints']
    print("   ✓ 404 handling passed")

    # Test 9: 405 error
    print("\n9. Testing 405 error handling")
    response = client.get('/approx')
    print(f"   Status: {response.status_code}")
    data = json.loads(response.data)
    assert response.status_code == 405
    assert data['error']['type'] == 'MethodNotAllowedError'
    assert 'POST' in data['error']['details']['allowed']
    print("   ✓ 405 handling passed")

    # Test 10: Statistics count the runs
    response = client.get('/health')
    stats = json.loads(response.data)['data']['statistics']
    print(f"\n10. Statistics: {stats}")
    assert stats['approx_runs'] >= 1
    assert stats['failures'] >= 3

    print("\n" + "=" * 70)
    print("All API tests passed!")
    print("=" * 70)


if __name__ == '__main__':
    test_api()
